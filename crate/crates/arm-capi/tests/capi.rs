//! Exercises the C entry points from Rust; the ABI surface is identical to
//! what a C caller sees.

use std::ffi::CStr;
use std::ptr;

use arm_capi::*;

/// Two rank-1 groups in 4 ambient dims, row-major.
fn two_group_data() -> (usize, usize, Vec<f64>) {
    let (rows, cols) = (4, 8);
    let mut data = vec![0.0; rows * cols];
    for p in 0..4 {
        data[p] = 1.0 + 0.1 * p as f64;
        data[cols + p] = 2.0 - 0.1 * p as f64;
    }
    for p in 4..8 {
        data[2 * cols + p] = 1.5 - 0.1 * p as f64;
        data[3 * cols + p] = 0.5 + 0.2 * p as f64;
    }
    (rows, cols, data)
}

#[test]
fn version_is_a_nonempty_c_string() {
    let raw = arm_version();
    assert!(!raw.is_null());
    let s = unsafe { CStr::from_ptr(raw) }.to_str().unwrap();
    assert!(!s.is_empty());
}

#[test]
fn matrix_round_trip_and_bounds() {
    let (rows, cols, data) = two_group_data();
    let m = unsafe { arm_matrix_new(rows, cols, data.as_ptr()) };
    assert!(!m.is_null());
    assert_eq!(arm_matrix_rows(m), rows);
    assert_eq!(arm_matrix_cols(m), cols);
    let mut v = 0.0;
    assert_eq!(arm_matrix_get(m, 1, 2, &mut v), ArmStatus::Ok);
    assert_eq!(v, data[cols + 2]); // row-major layout
    assert_eq!(arm_matrix_get(m, rows, 0, &mut v), ArmStatus::InvalidArgument);
    let err = unsafe { CStr::from_ptr(arm_last_error_message()) };
    assert!(err.to_str().unwrap().contains("out of bounds"));
    arm_matrix_free(m);
}

#[test]
fn invalid_matrix_inputs_are_rejected() {
    assert!(unsafe { arm_matrix_new(2, 2, ptr::null()) }.is_null());
    let nan = [f64::NAN; 4];
    assert!(unsafe { arm_matrix_new(2, 2, nan.as_ptr()) }.is_null());
    let fine = [1.0; 4];
    assert!(unsafe { arm_matrix_new(0, 2, fine.as_ptr()) }.is_null());
    // Frees tolerate null.
    arm_matrix_free(ptr::null_mut());
    arm_solve_result_free(ptr::null_mut());
    arm_labels_free(ptr::null_mut());
}

#[test]
fn solve_produces_feasible_factors() {
    let (rows, cols, data) = two_group_data();
    let m = unsafe { arm_matrix_new(rows, cols, data.as_ptr()) };
    let mut result: *mut ArmSolveResult = ptr::null_mut();
    let status = arm_solve(m, ptr::null(), &mut result);
    assert_eq!(status, ArmStatus::Ok);
    assert!(arm_solve_result_converged(result));
    assert!(arm_solve_result_iterations(result) > 0);

    let z = arm_solve_result_z(result);
    let e = arm_solve_result_e(result);
    assert_eq!((arm_matrix_rows(z), arm_matrix_cols(z)), (cols, cols));
    assert_eq!((arm_matrix_rows(e), arm_matrix_cols(e)), (rows, cols));

    // X - XZ - E ~ 0 entrywise, pulled back through the accessor.
    let mut max_residual: f64 = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let mut xz = 0.0;
            for l in 0..cols {
                let (mut xv, mut zv) = (0.0, 0.0);
                assert_eq!(arm_matrix_get(m, i, l, &mut xv), ArmStatus::Ok);
                assert_eq!(arm_matrix_get(z, l, j, &mut zv), ArmStatus::Ok);
                xz += xv * zv;
            }
            let (mut xv, mut ev) = (0.0, 0.0);
            arm_matrix_get(m, i, j, &mut xv);
            arm_matrix_get(e, i, j, &mut ev);
            max_residual = max_residual.max((xv - xz - ev).abs());
        }
    }
    assert!(max_residual <= 1e-4, "feasibility residual {max_residual}");

    arm_matrix_free(z);
    arm_matrix_free(e);
    arm_solve_result_free(result);
    arm_matrix_free(m);
}

#[test]
fn cluster_recovers_the_two_groups() {
    let (rows, cols, data) = two_group_data();
    let m = unsafe { arm_matrix_new(rows, cols, data.as_ptr()) };
    let mut labels: *mut ArmLabels = ptr::null_mut();
    let status = arm_cluster(m, 2, ptr::null(), 2, 0, &mut labels);
    assert!(matches!(status, ArmStatus::Ok | ArmStatus::NotConverged));
    assert_eq!(arm_labels_len(labels), cols);

    let mut first = 0;
    assert_eq!(arm_labels_get(labels, 0, &mut first), ArmStatus::Ok);
    for i in 0..cols {
        let mut l = 0;
        assert_eq!(arm_labels_get(labels, i, &mut l), ArmStatus::Ok);
        assert_eq!(l == first, i < 4, "sample {i} grouped incorrectly");
    }
    let mut oob = 0;
    assert_eq!(arm_labels_get(labels, cols, &mut oob), ArmStatus::InvalidArgument);

    arm_labels_free(labels);
    arm_matrix_free(m);
}

#[test]
fn null_handles_are_reported_not_crashed() {
    let mut out: *mut ArmSolveResult = ptr::null_mut();
    assert_eq!(arm_solve(ptr::null(), ptr::null(), &mut out), ArmStatus::NullPointer);
    assert!(arm_solve_result_z(ptr::null()).is_null());
    assert_eq!(arm_solve_result_iterations(ptr::null()), 0);
    assert!(!arm_solve_result_converged(ptr::null()));
    assert_eq!(arm_labels_len(ptr::null()), 0);
    assert_eq!(arm_matrix_rows(ptr::null()), 0);
}

#[test]
fn options_default_matches_the_library_preset() {
    let opts = arm_solver_options_default();
    assert_eq!(opts.lambda, 2.0);
    assert_eq!(opts.mu0, 10.0);
    assert_eq!(opts.rho, 1.05);
    assert_eq!(opts.error_model, ArmErrorModel::L21);
    assert_eq!(opts.method, ArmMethod::Arctan);

    // Invalid overrides surface as InvalidArgument, not panics.
    let mut bad = opts;
    bad.lambda = -1.0;
    let (rows, cols, data) = two_group_data();
    let m = unsafe { arm_matrix_new(rows, cols, data.as_ptr()) };
    let mut result: *mut ArmSolveResult = ptr::null_mut();
    assert_eq!(arm_solve(m, &bad, &mut result), ArmStatus::InvalidArgument);
    assert!(result.is_null());
    arm_matrix_free(m);
}

#[test]
fn generated_header_exists_and_declares_the_surface() {
    let header = std::fs::read_to_string(concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/include/arm.h"
    ))
    .expect("header generated at build time");
    for decl in [
        "typedef struct ArmMatrix ArmMatrix;",
        "arm_solver_options_default",
        "arm_solve(",
        "arm_cluster(",
        "arm_last_error_message",
    ] {
        assert!(header.contains(decl), "header missing {decl:?}");
    }
}

#[test]
fn nuclear_method_is_selectable() {
    let (rows, cols, data) = two_group_data();
    let m = unsafe { arm_matrix_new(rows, cols, data.as_ptr()) };
    let mut opts = arm_solver_options_default();
    opts.method = ArmMethod::Nuclear;
    let mut result: *mut ArmSolveResult = ptr::null_mut();
    let status = arm_solve(m, &opts, &mut result);
    assert!(matches!(status, ArmStatus::Ok | ArmStatus::NotConverged));
    assert!(!result.is_null());
    arm_solve_result_free(result);

    // The clustering path rejects the baseline surrogate.
    let mut labels: *mut ArmLabels = ptr::null_mut();
    assert_eq!(arm_cluster(m, 2, &opts, 2, 0, &mut labels), ArmStatus::InvalidArgument);
    arm_matrix_free(m);
}
