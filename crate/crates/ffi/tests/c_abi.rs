use std::ffi::{CStr, CString};
use std::ptr;

use posesync_ffi::*;

fn pose(x: f64, y: f64, theta: f64) -> PsPose {
    PsPose { x, y, theta }
}

fn last_error() -> String {
    let p = ps_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

const TRIANGLE: &str = r#"{
  "nodes": [
    {"id": 0, "true": [0, 0, 0], "noisy": [0.3, -0.2, 2.0], "provenance": "weak"},
    {"id": 1, "true": [10, 0, 90], "noisy": [10.2, 0.4, 93.0], "provenance": "strong"},
    {"id": 2, "true": [0, 12, -45], "noisy": [-0.5, 12.1, -47.0], "provenance": "weak"}
  ],
  "edges": [
    {"from": 1, "to": 0, "predicted": [10, 0, 90], "overlap": 0.8},
    {"from": 0, "to": 1, "predicted": [0, 10, -90], "overlap": 0.8},
    {"from": 2, "to": 0, "predicted": [0, 12, -45], "overlap": 0.8},
    {"from": 0, "to": 2, "predicted": [8.485281374238571, -8.485281374238571, 45], "overlap": 0.8},
    {"from": 2, "to": 1, "predicted": [12, 10, -135], "overlap": 0.8},
    {"from": 1, "to": 2, "predicted": [15.556349186104045, -1.414213562373095, 135], "overlap": 0.8}
  ]
}"#;

#[test]
fn pose_algebra_round_trip() {
    let a = pose(1.0, 2.0, 0.3);
    let b = pose(-4.0, 0.5, 2.9);
    let mut ab = pose(0.0, 0.0, 0.0);
    let mut inv = ab;
    let mut back = ab;
    unsafe {
        assert_eq!(ps_pose_compose(&a, &b, &mut ab), PsStatus::Ok);
        assert_eq!(ps_pose_inverse(&a, &mut inv), PsStatus::Ok);
        assert_eq!(ps_pose_compose(&inv, &ab, &mut back), PsStatus::Ok);
    }
    assert!((back.x - b.x).abs() < 1e-12 && (back.y - b.y).abs() < 1e-12 && (back.theta - b.theta).abs() < 1e-12);

    let mut rel = ab;
    unsafe { assert_eq!(ps_pose_relative(&a, &ab, &mut rel), PsStatus::Ok) };
    assert!((rel.x - b.x).abs() < 1e-12);
}

#[test]
fn null_pointers_are_reported() {
    let a = pose(0.0, 0.0, 0.0);
    unsafe {
        assert_eq!(ps_pose_compose(&a, ptr::null(), ptr::null_mut()), PsStatus::NullPointer);
        assert!(last_error().contains("null"));
        assert_eq!(ps_graph_from_json(ptr::null(), ptr::null_mut()), PsStatus::NullPointer);
        ps_graph_free(ptr::null_mut());
        ps_sync_result_free(ptr::null_mut());
    }
}

#[test]
fn overlap_through_abi() {
    let a = pose(0.0, 0.0, 0.0);
    let b = pose(100.0, 0.0, 0.0);
    let mut o = 0.0;
    unsafe {
        assert_eq!(ps_overlap_fraction(&a, &b, 200.0, 80.0, &mut o), PsStatus::Ok);
        assert!((o - 0.5).abs() < 1e-12);
        assert_eq!(ps_overlap_fraction(&a, &b, -1.0, 80.0, &mut o), PsStatus::InvalidParameter);
    }
}

#[test]
fn synchronize_exact_graph() {
    let json = CString::new(TRIANGLE).unwrap();
    let mut g: *mut PsGraph = ptr::null_mut();
    let mut r: *mut PsSyncResult = ptr::null_mut();
    unsafe {
        assert_eq!(ps_graph_from_json(json.as_ptr(), &mut g), PsStatus::Ok);
        let mut n = 0;
        assert_eq!(ps_graph_node_count(g, &mut n), PsStatus::Ok);
        assert_eq!(n, 3);

        let opts = ps_sync_options_default();
        assert_eq!(opts.icm_iters, 15);
        assert_eq!(ps_synchronize(g, &opts, &mut r), PsStatus::Ok);
        assert_eq!(ps_sync_result_node_count(r, &mut n), PsStatus::Ok);
        assert_eq!(n, 3);

        // Predictions are exact; ICM from the noisy start converges geometrically.
        let mut est = [pose(0.0, 0.0, 0.0); 3];
        for (k, e) in est.iter_mut().enumerate() {
            let mut id = usize::MAX;
            assert_eq!(ps_sync_result_pose(r, k, &mut id, e), PsStatus::Ok);
            assert_eq!(id, k);
        }
        let mut rel = pose(0.0, 0.0, 0.0);
        ps_pose_relative(&est[0], &est[1], &mut rel);
        assert!((rel.x - 10.0).abs() < 1e-4 && rel.y.abs() < 1e-4);
        assert!((rel.theta - std::f64::consts::FRAC_PI_2).abs() < 1e-5);

        let mut w = 0.0;
        assert_eq!(ps_sync_result_edge_weight(r, 1, 0, &mut w), PsStatus::Ok);
        assert!((w - 0.8).abs() < 1e-9);
        assert_eq!(ps_sync_result_edge_weight(r, 5, 0, &mut w), PsStatus::UnknownNode);
        let mut id = 0;
        let mut p = pose(0.0, 0.0, 0.0);
        assert_eq!(ps_sync_result_pose(r, 3, &mut id, &mut p), PsStatus::OutOfRange);
        let mut clamps = 99;
        assert_eq!(ps_sync_result_clamp_events(r, &mut clamps), PsStatus::Ok);

        ps_sync_result_free(r);
        ps_graph_free(g);
    }
}

#[test]
fn bad_inputs_map_to_status_codes() {
    let mut g: *mut PsGraph = ptr::null_mut();
    unsafe {
        let bad = CString::new("{not json").unwrap();
        assert_eq!(ps_graph_from_json(bad.as_ptr(), &mut g), PsStatus::Json);
        assert!(g.is_null());

        let split = CString::new(
            r#"{"nodes": [
                {"id": 0, "noisy": [0, 0, 0]}, {"id": 1, "noisy": [1, 0, 0]},
                {"id": 2, "noisy": [5, 0, 0]}, {"id": 3, "noisy": [6, 0, 0]}],
              "edges": [
                {"from": 0, "to": 1, "predicted": [1, 0, 0], "overlap": 1},
                {"from": 1, "to": 0, "predicted": [-1, 0, 0], "overlap": 1},
                {"from": 2, "to": 3, "predicted": [1, 0, 0], "overlap": 1},
                {"from": 3, "to": 2, "predicted": [-1, 0, 0], "overlap": 1}]}"#,
        )
        .unwrap();
        assert_eq!(ps_graph_from_json(split.as_ptr(), &mut g), PsStatus::Ok);
        let mut r: *mut PsSyncResult = ptr::null_mut();
        assert_eq!(ps_synchronize(g, ptr::null(), &mut r), PsStatus::Disconnected);
        assert!(r.is_null());
        assert!(!last_error().is_empty());

        let mut opts = ps_sync_options_default();
        opts.node_model = 7;
        assert_eq!(ps_synchronize(g, &opts, &mut r), PsStatus::InvalidParameter);
        ps_graph_free(g);
    }
}
