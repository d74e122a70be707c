//! C ABI over `posesync`.
//!
//! Every fallible call returns a [`PsStatus`] and writes its result through
//! an out-pointer. On failure a message is kept per thread and can be read
//! with [`ps_last_error_message`]. Handles returned by the library must be
//! released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use posesync::overlap::{overlap_fraction, MessageFootprint};
use posesync::se2;
use posesync::{icm_synchronize, ConsistencyConfig, Error, NodeModel, Pose, PoseGraph, SyncResult};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidParameter = 3,
    InvalidGraph = 4,
    Disconnected = 5,
    UnknownNode = 6,
    Numerical = 7,
    Json = 8,
    OutOfRange = 9,
    Panic = 10,
}

/// Pose `(x, y, theta)` in meters and radians.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl From<Pose> for PsPose {
    fn from(p: Pose) -> Self {
        PsPose {
            x: p.x,
            y: p.y,
            theta: p.theta,
        }
    }
}

impl From<PsPose> for Pose {
    fn from(p: PsPose) -> Self {
        Pose::new(p.x, p.y, p.theta)
    }
}

pub const PS_NODE_MODEL_STUDENT_T: u32 = 0;
pub const PS_NODE_MODEL_GAUSSIAN: u32 = 1;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PsSyncOptions {
    /// One of the `PS_NODE_MODEL_*` constants.
    pub node_model: u32,
    pub reweighting: bool,
    pub icm_iters: u32,
    pub reweight_iters: u32,
    pub em_iters: u32,
    pub dof: f64,
    pub gamma_shape: f64,
}

/// Opaque pose graph.
pub struct PsGraph(PoseGraph);

/// Opaque synchronization output.
pub struct PsSyncResult(SyncResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PsStatus {
    match e {
        Error::InvalidParameter(_) | Error::LengthMismatch { .. } | Error::ZeroTotalWeight => PsStatus::InvalidParameter,
        Error::InvalidGraph(_) | Error::IsolatedNode(_) | Error::InfeasibleScene(_) => PsStatus::InvalidGraph,
        Error::Disconnected(_) => PsStatus::Disconnected,
        Error::UnknownNode(_) => PsStatus::UnknownNode,
        Error::NotPositiveDefinite | Error::EmptyObservations | Error::TooFewObservations(_) => PsStatus::Numerical,
        Error::Json(_) => PsStatus::Json,
        Error::Trial { source, .. } => status_of(source),
        Error::Io { .. } | Error::Csv(_) => PsStatus::InvalidParameter,
    }
}

fn fail(status: PsStatus, msg: impl Into<String>) -> PsStatus {
    set_error(msg.into());
    status
}

fn guard(f: impl FnOnce() -> Result<(), PsStatus>) -> PsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PsStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(PsStatus::Panic, "internal panic"),
    }
}

fn lib_err(e: Error) -> PsStatus {
    let s = status_of(&e);
    fail(s, e.to_string())
}

unsafe fn out<'a, T>(p: *mut T) -> Result<&'a mut T, PsStatus> {
    p.as_mut().ok_or_else(|| fail(PsStatus::NullPointer, "null output pointer"))
}

unsafe fn arg<'a, T>(p: *const T) -> Result<&'a T, PsStatus> {
    p.as_ref().ok_or_else(|| fail(PsStatus::NullPointer, "null argument"))
}

/// Message describing the last failure on this thread, or null. The pointer
/// stays valid until the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn ps_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// # Safety
/// Pointers must be null or valid for the access implied by their type.
#[no_mangle]
pub unsafe extern "C" fn ps_pose_compose(a: *const PsPose, b: *const PsPose, result: *mut PsPose) -> PsStatus {
    guard(|| {
        let (a, b) = (arg(a)?, arg(b)?);
        *out(result)? = se2::compose(&(*a).into(), &(*b).into()).into();
        Ok(())
    })
}

/// # Safety
/// Pointers must be null or valid for the access implied by their type.
#[no_mangle]
pub unsafe extern "C" fn ps_pose_inverse(a: *const PsPose, result: *mut PsPose) -> PsStatus {
    guard(|| {
        let a = arg(a)?;
        *out(result)? = se2::inverse(&(*a).into()).into();
        Ok(())
    })
}

/// Relative pose `inverse(pose_i) * pose_j`.
///
/// # Safety
/// Pointers must be null or valid for the access implied by their type.
#[no_mangle]
pub unsafe extern "C" fn ps_pose_relative(
    pose_i: *const PsPose,
    pose_j: *const PsPose,
    result: *mut PsPose,
) -> PsStatus {
    guard(|| {
        let (i, j) = (arg(pose_i)?, arg(pose_j)?);
        *out(result)? = se2::relative(&(*i).into(), &(*j).into()).into();
        Ok(())
    })
}

/// Overlap fraction of two `length` x `width` rectangles centered on the poses.
///
/// # Safety
/// Pointers must be null or valid for the access implied by their type.
#[no_mangle]
pub unsafe extern "C" fn ps_overlap_fraction(
    a: *const PsPose,
    b: *const PsPose,
    length: f64,
    width: f64,
    result: *mut f64,
) -> PsStatus {
    guard(|| {
        let (a, b) = (arg(a)?, arg(b)?);
        if !(length > 0.0 && width > 0.0) {
            return Err(fail(PsStatus::InvalidParameter, "footprint dimensions must be positive"));
        }
        let fp = MessageFootprint { length, width };
        *out(result)? = overlap_fraction(&(*a).into(), &(*b).into(), &fp);
        Ok(())
    })
}

/// Parses a graph from its JSON interchange document.
///
/// # Safety
/// `json` must be null or a NUL-terminated string; `graph` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_graph_from_json(json: *const c_char, graph: *mut *mut PsGraph) -> PsStatus {
    guard(|| {
        let slot = out(graph)?;
        *slot = ptr::null_mut();
        if json.is_null() {
            return Err(fail(PsStatus::NullPointer, "null json"));
        }
        let s = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| fail(PsStatus::InvalidUtf8, e.to_string()))?;
        let g = PoseGraph::from_json(s).map_err(lib_err)?;
        *slot = Box::into_raw(Box::new(PsGraph(g)));
        Ok(())
    })
}

/// # Safety
/// `graph` must be null or a handle from [`ps_graph_from_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_graph_free(graph: *mut PsGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ps_graph_node_count(graph: *const PsGraph, count: *mut usize) -> PsStatus {
    guard(|| {
        let g = arg(graph)?;
        *out(count)? = g.0.len();
        Ok(())
    })
}

#[no_mangle]
pub extern "C" fn ps_sync_options_default() -> PsSyncOptions {
    let c = ConsistencyConfig::default();
    PsSyncOptions {
        node_model: PS_NODE_MODEL_STUDENT_T,
        reweighting: c.reweighting,
        icm_iters: c.icm_iters as u32,
        reweight_iters: c.reweight_iters as u32,
        em_iters: c.em.num_iters as u32,
        dof: c.em.dof,
        gamma_shape: c.gamma_shape,
    }
}

/// Runs synchronization. A null `options` uses the defaults.
///
/// # Safety
/// `graph` must be a live handle, `options` null or valid, `result` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_synchronize(
    graph: *const PsGraph,
    options: *const PsSyncOptions,
    result: *mut *mut PsSyncResult,
) -> PsStatus {
    guard(|| {
        let slot = out(result)?;
        *slot = ptr::null_mut();
        let g = arg(graph)?;
        let o = options.as_ref().copied().unwrap_or_else(|| ps_sync_options_default());
        let node_model = match o.node_model {
            PS_NODE_MODEL_STUDENT_T => NodeModel::StudentT,
            PS_NODE_MODEL_GAUSSIAN => NodeModel::Gaussian,
            m => return Err(fail(PsStatus::InvalidParameter, format!("unknown node model {m}"))),
        };
        let mut cfg = ConsistencyConfig {
            node_model,
            reweighting: o.reweighting,
            icm_iters: o.icm_iters as usize,
            reweight_iters: o.reweight_iters as usize,
            gamma_shape: o.gamma_shape,
            ..Default::default()
        };
        cfg.em.num_iters = o.em_iters as usize;
        cfg.em.dof = o.dof;
        let r = icm_synchronize(&g.0, &cfg).map_err(lib_err)?;
        *slot = Box::into_raw(Box::new(PsSyncResult(r)));
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a handle from [`ps_synchronize`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ps_sync_result_free(result: *mut PsSyncResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle; `count` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_sync_result_node_count(result: *const PsSyncResult, count: *mut usize) -> PsStatus {
    guard(|| {
        let r = arg(result)?;
        *out(count)? = r.0.poses.len();
        Ok(())
    })
}

/// Node id and estimated pose at position `index` in ascending id order.
///
/// # Safety
/// `result` must be a live handle; out-pointers null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_sync_result_pose(
    result: *const PsSyncResult,
    index: usize,
    node_id: *mut usize,
    pose: *mut PsPose,
) -> PsStatus {
    guard(|| {
        let r = arg(result)?;
        let (id_out, pose_out) = (out(node_id)?, out(pose)?);
        let (id, p) =
            r.0.poses
                .iter()
                .nth(index)
                .ok_or_else(|| fail(PsStatus::OutOfRange, format!("node index {index} out of range")))?;
        *id_out = *id;
        *pose_out = (*p).into();
        Ok(())
    })
}

/// Final trust weight of edge `from -> to`.
///
/// # Safety
/// `result` must be a live handle; `weight` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_sync_result_edge_weight(
    result: *const PsSyncResult,
    from: usize,
    to: usize,
    weight: *mut f64,
) -> PsStatus {
    guard(|| {
        let r = arg(result)?;
        let w = out(weight)?;
        *w = *r
            .0
            .weights
            .get(&(from, to))
            .ok_or_else(|| fail(PsStatus::UnknownNode, format!("no edge {from}->{to}")))?;
        Ok(())
    })
}

/// # Safety
/// `result` must be a live handle; `count` null or writable.
#[no_mangle]
pub unsafe extern "C" fn ps_sync_result_clamp_events(result: *const PsSyncResult, count: *mut usize) -> PsStatus {
    guard(|| {
        let r = arg(result)?;
        *out(count)? = r.0.clamp_events;
        Ok(())
    })
}
