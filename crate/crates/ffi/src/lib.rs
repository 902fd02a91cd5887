//! C interface to the laboratory. Handles are opaque and owned by the caller,
//! who releases them with the matching `*_free`. Every fallible function
//! returns a [`KglabStatus`]; the message of the last failure on the calling
//! thread is available through [`kglab_last_error`].
//!
//! Complex fields cross the boundary as interleaved `(re, im)` doubles.
//! Vector fields are component-major: component `a` of point `i` is at
//! `a * n + i`.

use std::cell::RefCell;
use std::ffi::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use kglab::modulated::Modulator;
use kglab::num_complex::Complex64;
use kglab::verify::{evolve_fluid, evolve_wave};
use kglab::{FluidState, Grid, KgSolver, KgState, LabError, Potential, RepSolver};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KglabStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGrid = 3,
    GridMismatch = 4,
    Cfl = 5,
    BlowUp = 6,
    NonResonant = 7,
    Vacuum = 8,
    Unnormalized = 9,
    Constraint = 10,
    BufferTooSmall = 11,
    Panic = 12,
    Other = 13,
}

impl From<&LabError> for KglabStatus {
    fn from(e: &LabError) -> Self {
        match e {
            LabError::InvalidGrid(_) => KglabStatus::InvalidGrid,
            LabError::InvalidArgument(_) | LabError::Negative { .. } | LabError::Config(_) => {
                KglabStatus::InvalidArgument
            }
            LabError::Cfl { .. } => KglabStatus::Cfl,
            LabError::BlowUp { .. } => KglabStatus::BlowUp,
            LabError::GridMismatch => KglabStatus::GridMismatch,
            LabError::Unnormalized(_) => KglabStatus::Unnormalized,
            LabError::Vacuum => KglabStatus::Vacuum,
            LabError::NonResonant(_) => KglabStatus::NonResonant,
            LabError::Constraint(_) => KglabStatus::Constraint,
            _ => KglabStatus::Other,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

enum Fail {
    Lab(LabError),
    Status(KglabStatus, String),
}

impl From<LabError> for Fail {
    fn from(e: LabError) -> Self {
        Fail::Lab(e)
    }
}

fn null(what: &str) -> Fail {
    Fail::Status(KglabStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> KglabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => KglabStatus::Ok,
        Ok(Err(Fail::Lab(e))) => {
            set_error(e.to_string());
            KglabStatus::from(&e)
        }
        Ok(Err(Fail::Status(s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            KglabStatus::Panic
        }
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, what: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn handle<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn handle_mut<'a, T>(ptr: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn complex_field(raw: &[f64]) -> Vec<Complex64> {
    raw.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

pub struct KglabGrid(Grid);

pub struct KglabKg {
    solver: KgSolver,
    state: KgState,
}

pub struct KglabFluid {
    solver: RepSolver,
    state: FluidState,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KglabKgDiagnostics {
    pub time: f64,
    pub energy: f64,
    pub charge: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct KglabModulated {
    pub h: f64,
    pub h0: f64,
    pub g: f64,
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n4: f64,
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the buffer size needed for the full message.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn kglab_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len() + 1
    })
}

/// Creates a periodic grid with `n[a]` points and length `lengths[a]` per axis.
///
/// # Safety
/// `n` and `lengths` must point to `dim` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_grid_new(
    dim: usize,
    n: *const usize,
    lengths: *const f64,
    out: *mut *mut KglabGrid,
) -> KglabStatus {
    guard(|| {
        let g = Grid::new(slice(n, dim, "n")?, slice(lengths, dim, "lengths")?)?;
        put(out, Box::into_raw(Box::new(KglabGrid(g))), "out")
    })
}

/// Number of grid points, or 0 for a null grid.
///
/// # Safety
/// `grid` must be null or a live grid handle.
#[no_mangle]
pub unsafe extern "C" fn kglab_grid_len(grid: *const KglabGrid) -> usize {
    grid.as_ref().map_or(0, |g| g.0.len())
}

/// # Safety
/// `grid` must be null or a handle from [`kglab_grid_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kglab_grid_free(grid: *mut KglabGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Exact plane wave `A e^{i(k.x - omega t)/eps}` with `k` of length `dim`.
///
/// # Safety
/// `grid` must be live, `k` must point to `dim` values, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_plane_wave(
    grid: *const KglabGrid,
    gamma: f64,
    amp_re: f64,
    amp_im: f64,
    k: *const f64,
    eps: f64,
    out: *mut *mut KglabKg,
) -> KglabStatus {
    guard(|| {
        let g = &handle(grid, "grid")?.0;
        let solver = KgSolver::new(g.clone(), Potential::new(gamma)?);
        let state = solver.plane_wave(Complex64::new(amp_re, amp_im), slice(k, g.dim(), "k")?, eps)?;
        put(out, Box::into_raw(Box::new(KglabKg { solver, state })), "out")
    })
}

/// Wave state from sampled `phi` and `d_t phi`, each `2 n` interleaved doubles.
///
/// # Safety
/// `grid` must be live, `phi` and `phi_t` must point to `2 n` values.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_from_fields(
    grid: *const KglabGrid,
    gamma: f64,
    eps: f64,
    phi: *const f64,
    phi_t: *const f64,
    out: *mut *mut KglabKg,
) -> KglabStatus {
    guard(|| {
        let g = &handle(grid, "grid")?.0;
        let n = g.len();
        let solver = KgSolver::new(g.clone(), Potential::new(gamma)?);
        let phi = complex_field(slice(phi, 2 * n, "phi")?);
        let phi_t = complex_field(slice(phi_t, 2 * n, "phi_t")?);
        let state = solver.state(phi, phi_t, eps)?;
        put(out, Box::into_raw(Box::new(KglabKg { solver, state })), "out")
    })
}

/// Largest stable step for the current state.
///
/// # Safety
/// `kg` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_dt_max(kg: *const KglabKg, out: *mut f64) -> KglabStatus {
    guard(|| {
        let kg = handle(kg, "kg")?;
        put(out, kg.solver.dt_max(&kg.state), "out")
    })
}

/// One step of size `dt`. On failure the state is left unchanged.
///
/// # Safety
/// `kg` must be live.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_step(kg: *mut KglabKg, dt: f64) -> KglabStatus {
    guard(|| {
        let kg = handle_mut(kg, "kg")?;
        kg.state = kg.solver.step(&kg.state, dt)?;
        Ok(())
    })
}

/// Steps to time `t` with steps of `dt_safety` times the stability limit.
///
/// # Safety
/// `kg` must be live.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_advance(kg: *mut KglabKg, t: f64, dt_safety: f64) -> KglabStatus {
    guard(|| {
        let kg = handle_mut(kg, "kg")?;
        if !(dt_safety > 0.0 && dt_safety <= 1.0) {
            return Err(Fail::Status(KglabStatus::InvalidArgument, format!("dt_safety = {dt_safety} not in (0, 1]")));
        }
        kg.state = evolve_wave(&kg.solver, &kg.state, t, dt_safety)?;
        Ok(())
    })
}

/// # Safety
/// `kg` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_diagnostics(kg: *const KglabKg, out: *mut KglabKgDiagnostics) -> KglabStatus {
    guard(|| {
        let kg = handle(kg, "kg")?;
        let d = kg.solver.diagnostics(&kg.state);
        put(out, KglabKgDiagnostics { time: kg.state.t, energy: d.energy, charge: d.charge }, "out")
    })
}

/// Copies `phi` as `2 n` interleaved doubles into `buf` of `len` doubles.
///
/// # Safety
/// `kg` must be live and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_copy_phi(kg: *const KglabKg, buf: *mut f64, len: usize) -> KglabStatus {
    guard(|| {
        let kg = handle(kg, "kg")?;
        let need = 2 * kg.state.phi.len();
        if len < need {
            return Err(Fail::Status(KglabStatus::BufferTooSmall, format!("need {need} doubles, got {len}")));
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        let dst = std::slice::from_raw_parts_mut(buf, need);
        for (d, z) in dst.chunks_exact_mut(2).zip(&kg.state.phi) {
            d[0] = z.re;
            d[1] = z.im;
        }
        Ok(())
    })
}

/// # Safety
/// `kg` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kglab_kg_free(kg: *mut KglabKg) {
    if !kg.is_null() {
        drop(Box::from_raw(kg));
    }
}

/// Fluid state from spatial velocity `u` (`dim * n`, component-major) and
/// `f = sqrt(V'(rho))` (`n` values).
///
/// # Safety
/// `grid` must be live; `u` and `f` must point to the stated counts.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_new(
    grid: *const KglabGrid,
    gamma: f64,
    u: *const f64,
    f: *const f64,
    out: *mut *mut KglabFluid,
) -> KglabStatus {
    guard(|| {
        let g = &handle(grid, "grid")?.0;
        let n = g.len();
        let solver = RepSolver::new(g.clone(), Potential::new(gamma)?);
        let u = slice(u, g.dim() * n, "u")?.chunks_exact(n).map(<[f64]>::to_vec).collect();
        let state = solver.state(u, slice(f, n, "f")?.to_vec())?;
        put(out, Box::into_raw(Box::new(KglabFluid { solver, state })), "out")
    })
}

/// Constant fluid state with spatial velocity `u` (`dim` values) and density `rho`.
///
/// # Safety
/// `grid` must be live, `u` must point to `dim` values.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_constant(
    grid: *const KglabGrid,
    gamma: f64,
    u: *const f64,
    rho: f64,
    out: *mut *mut KglabFluid,
) -> KglabStatus {
    guard(|| {
        let g = &handle(grid, "grid")?.0;
        let solver = RepSolver::new(g.clone(), Potential::new(gamma)?);
        let state = solver.constant_state(slice(u, g.dim(), "u")?, rho)?;
        put(out, Box::into_raw(Box::new(KglabFluid { solver, state })), "out")
    })
}

/// # Safety
/// `fluid` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_dt_max(fluid: *const KglabFluid, out: *mut f64) -> KglabStatus {
    guard(|| {
        let fl = handle(fluid, "fluid")?;
        put(out, fl.solver.dt_max(&fl.state), "out")
    })
}

/// One step of size `dt`. On failure the state is left unchanged.
///
/// # Safety
/// `fluid` must be live.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_step(fluid: *mut KglabFluid, dt: f64) -> KglabStatus {
    guard(|| {
        let fl = handle_mut(fluid, "fluid")?;
        fl.state = fl.solver.step(&fl.state, dt)?;
        Ok(())
    })
}

/// Steps to time `t` at the stability limit.
///
/// # Safety
/// `fluid` must be live.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_advance(fluid: *mut KglabFluid, t: f64) -> KglabStatus {
    guard(|| {
        let fl = handle_mut(fluid, "fluid")?;
        fl.state = evolve_fluid(&fl.solver, &fl.state, t)?;
        Ok(())
    })
}

/// `max |U^a U_a + 1 + 2 V'(rho)|`.
///
/// # Safety
/// `fluid` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_normalization(fluid: *const KglabFluid, out: *mut f64) -> KglabStatus {
    guard(|| {
        let fl = handle(fluid, "fluid")?;
        put(out, fl.solver.normalization_residual(&fl.state), "out")
    })
}

/// # Safety
/// `fluid` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_time(fluid: *const KglabFluid, out: *mut f64) -> KglabStatus {
    guard(|| put(out, handle(fluid, "fluid")?.state.t, "out"))
}

/// # Safety
/// `fluid` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kglab_fluid_free(fluid: *mut KglabFluid) {
    if !fluid.is_null() {
        drop(Box::from_raw(fluid));
    }
}

/// Modulated energy and convergence norms of a wave/fluid pair built on the
/// same grid with the same exponent.
///
/// # Safety
/// `kg` and `fluid` must be live and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_modulated_energy(
    kg: *const KglabKg,
    fluid: *const KglabFluid,
    out: *mut KglabModulated,
) -> KglabStatus {
    guard(|| {
        let kg = handle(kg, "kg")?;
        let fl = handle(fluid, "fluid")?;
        let b = Modulator::new(&kg.solver, &fl.solver)?.build(&kg.state, &fl.state)?;
        let n = b.norms;
        let m = KglabModulated {
            h: b.h_energy,
            h0: b.h00_energy,
            g: b.g_corrector,
            n1: n.n1,
            n2: n.n2,
            n3: n.n3,
            n4: n.n4,
        };
        put(out, m, "out")
    })
}

/// `Theta(x, y) = V(x) - V(y) - V'(y)(x - y)` for `x, y >= 0`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn kglab_theta(gamma: f64, x: f64, y: f64, out: *mut f64) -> KglabStatus {
    guard(|| put(out, Potential::new(gamma)?.theta(x, y)?, "out"))
}
