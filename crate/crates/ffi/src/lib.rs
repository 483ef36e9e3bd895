//! C ABI over the converter core: an opaque ramp-table handle, integer
//! status codes, and plain-old-data getters.
//!
//! Contract: every function is safe to call with null pointers (it
//! returns `NlimStatus_NullArgument` or a documented sentinel), nothing
//! unwinds across the boundary, and every `*_build` result must be
//! released with the matching `*_free`.

use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use nlimsim::activation::{ActivationKind, ActivationSpec};
use nlimsim::adc::{AdcConfig, Converter, RampTable};
use nlimsim::analog::MacroConfig;
use nlimsim::codec::{decode_multibit, encode_multibit, EncodedWeight, MultiBitScheme};
use nlimsim::error::Error;
use nlimsim::ramp::RampMode;

/// ABI revision; bumped on any signature or semantic change.
pub const NLIM_ABI_VERSION: u32 = 1;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlimStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Argument outside its documented domain (bad name, bad range).
    InvalidArgument = 2,
    /// Valid request for a configuration this build does not support
    /// (unknown activation, resolution or weight precision out of range).
    Unsupported = 3,
    /// Physically or structurally impossible request, e.g. a ramp that
    /// does not fit the converter row budget.
    Infeasible = 4,
    /// Output buffer shorter than the data to be written.
    BufferTooSmall = 5,
    /// Unexpected internal failure (a bug; never part of normal flow).
    Internal = 6,
}

fn status_of(e: &Error) -> NlimStatus {
    match e {
        Error::Resolution(_) | Error::WeightBits(_) | Error::Activation(_) => {
            NlimStatus::Unsupported
        }
        _ if e.exit_code() == 3 => NlimStatus::Infeasible,
        _ => NlimStatus::InvalidArgument,
    }
}

/// Opaque handle: one built ramp table plus the electrical config it was
/// built against. Only pointers to it cross the boundary.
pub struct NlimTable {
    table: RampTable,
    cfg: MacroConfig,
}

/// ABI revision of this library.
#[no_mangle]
pub extern "C" fn nlim_abi_version() -> u32 {
    NLIM_ABI_VERSION
}

/// Static, nul-terminated name for a status code.
#[no_mangle]
pub extern "C" fn nlim_status_name(status: NlimStatus) -> *const c_char {
    let name: &'static [u8] = match status {
        NlimStatus::Ok => b"ok\0",
        NlimStatus::NullArgument => b"null argument\0",
        NlimStatus::InvalidArgument => b"invalid argument\0",
        NlimStatus::Unsupported => b"unsupported\0",
        NlimStatus::Infeasible => b"infeasible\0",
        NlimStatus::BufferTooSmall => b"buffer too small\0",
        NlimStatus::Internal => b"internal error\0",
    };
    name.as_ptr().cast()
}

/// Borrow a C string for the duration of the call.
unsafe fn parse_name<'a>(ptr: *const c_char) -> Result<&'a str, NlimStatus> {
    if ptr.is_null() {
        return Err(NlimStatus::NullArgument);
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| NlimStatus::InvalidArgument)
}

/// Build the ramp table for a named activation under the reference
/// electrical config.
///
/// `activation`: sigmoid, tanh, elu, selu, softsign, softplus or linear.
/// `mode`: pwm or mcl. On success `*out` owns the table; release it with
/// [`nlim_table_free`].
#[no_mangle]
pub unsafe extern "C" fn nlim_table_build(
    activation: *const c_char,
    n_bits: u32,
    mode: *const c_char,
    out: *mut *mut NlimTable,
) -> NlimStatus {
    if out.is_null() {
        return NlimStatus::NullArgument;
    }
    *out = std::ptr::null_mut();
    let act_name = match parse_name(activation) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let mode_name = match parse_name(mode) {
        Ok(s) => s,
        Err(st) => return st,
    };
    let built = catch_unwind(AssertUnwindSafe(|| -> Result<NlimTable, Error> {
        let kind = ActivationKind::parse(act_name)?;
        let ramp_mode = RampMode::parse(mode_name)?;
        let adc = AdcConfig::new(n_bits, ramp_mode, ActivationSpec::preset(kind));
        let cfg = MacroConfig::default();
        let table = RampTable::build(&adc, &cfg)?;
        Ok(NlimTable { table, cfg })
    }));
    match built {
        Ok(Ok(handle)) => {
            *out = Box::into_raw(Box::new(handle));
            NlimStatus::Ok
        }
        Ok(Err(e)) => status_of(&e),
        Err(_) => NlimStatus::Internal,
    }
}

/// Release a table handle. Null is a no-op.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_free(table: *mut NlimTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Ramp step count (2^n - 2); 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_step_count(table: *const NlimTable) -> u32 {
    table.as_ref().map_or(0, |t| t.table.steps.step_count() as u32)
}

/// Replica cells the ramp occupies; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_total_cells(table: *const NlimTable) -> u32 {
    table.as_ref().map_or(0, |t| t.table.schedule.total_cells)
}

/// Ramp-phase clock cycles; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_total_cycles(table: *const NlimTable) -> u32 {
    table.as_ref().map_or(0, |t| t.table.schedule.total_cycles)
}

/// Largest output code (2^n - 2); 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_max_code(table: *const NlimTable) -> u32 {
    table.as_ref().map_or(0, |t| t.table.max_code())
}

/// Code a zero MAC converts to after calibration; 0 for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_midcode(table: *const NlimTable) -> u32 {
    table.as_ref().map_or(0, |t| t.table.midcode())
}

/// One ramp LSB in activation input units; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_lsb(table: *const NlimTable) -> f64 {
    table.as_ref().map_or(f64::NAN, |t| t.table.steps.lsb)
}

/// Initial ramp offset in step units; NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_anchor_units(table: *const NlimTable) -> f64 {
    table.as_ref().map_or(f64::NAN, |t| t.table.anchor)
}

/// Copy the integer step weights into `steps_out` (capacity `cap`).
/// `written` receives the step count when non-null.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_steps(
    table: *const NlimTable,
    steps_out: *mut u32,
    cap: usize,
    written: *mut usize,
) -> NlimStatus {
    let Some(t) = table.as_ref() else {
        return NlimStatus::NullArgument;
    };
    if steps_out.is_null() {
        return NlimStatus::NullArgument;
    }
    let steps = &t.table.steps.quantized;
    if cap < steps.len() {
        return NlimStatus::BufferTooSmall;
    }
    std::ptr::copy_nonoverlapping(steps.as_ptr(), steps_out, steps.len());
    if !written.is_null() {
        *written = steps.len();
    }
    NlimStatus::Ok
}

/// Convert a MAC value in step units through the ideal converter.
/// `saturated_out` (nullable) receives 1 when the input sat past either
/// end of the ramp span.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_convert_units(
    table: *const NlimTable,
    mac_units: f64,
    code_out: *mut u32,
    saturated_out: *mut i32,
) -> NlimStatus {
    let Some(t) = table.as_ref() else {
        return NlimStatus::NullArgument;
    };
    if code_out.is_null() {
        return NlimStatus::NullArgument;
    }
    if !mac_units.is_finite() {
        return NlimStatus::InvalidArgument;
    }
    let result = Converter::ideal(&t.table).convert_units(mac_units);
    *code_out = result.code;
    if !saturated_out.is_null() {
        *saturated_out = result.saturated as i32;
    }
    NlimStatus::Ok
}

/// Convert a MAC voltage (volts) through the ideal converter under the
/// handle's electrical config.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_convert_volts(
    table: *const NlimTable,
    v_mac: f64,
    code_out: *mut u32,
) -> NlimStatus {
    let Some(t) = table.as_ref() else {
        return NlimStatus::NullArgument;
    };
    if code_out.is_null() {
        return NlimStatus::NullArgument;
    }
    if !v_mac.is_finite() {
        return NlimStatus::InvalidArgument;
    }
    *code_out = Converter::ideal(&t.table).convert(v_mac, &t.cfg).code;
    NlimStatus::Ok
}

/// Reconstructed activation output for a code (clamped to the code
/// range); NaN for a null handle.
#[no_mangle]
pub unsafe extern "C" fn nlim_table_decode_output(
    table: *const NlimTable,
    code: u32,
) -> f64 {
    table.as_ref().map_or(f64::NAN, |t| {
        t.table.decode_output(code.min(t.table.max_code()))
    })
}

/// Cells one weight occupies at the given precision; 0 when the
/// precision is unsupported.
#[no_mangle]
pub extern "C" fn nlim_cells_per_weight(weight_bits: u32) -> u32 {
    MultiBitScheme::for_bits(weight_bits)
        .map_or(0, |s| s.cells_per_weight as u32)
}

/// Spread a signed weight level over ternary cells (scheme order,
/// descending magnitude). `cells_out` needs
/// [`nlim_cells_per_weight`] entries; `written` (nullable) receives the
/// cell count.
#[no_mangle]
pub unsafe extern "C" fn nlim_encode_weight(
    weight_bits: u32,
    level: i32,
    cells_out: *mut i8,
    cap: usize,
    written: *mut usize,
) -> NlimStatus {
    if cells_out.is_null() {
        return NlimStatus::NullArgument;
    }
    let scheme = match MultiBitScheme::for_bits(weight_bits) {
        Ok(s) => s,
        Err(e) => return status_of(&e),
    };
    if cap < scheme.cells_per_weight {
        return NlimStatus::BufferTooSmall;
    }
    let enc = match encode_multibit(level, &scheme) {
        Ok(e) => e,
        Err(e) => return status_of(&e),
    };
    std::ptr::copy_nonoverlapping(enc.cell_weights.as_ptr(), cells_out, enc.cell_weights.len());
    if !written.is_null() {
        *written = enc.cell_weights.len();
    }
    NlimStatus::Ok
}

/// Recover the signed weight level from its cell pattern.
#[no_mangle]
pub unsafe extern "C" fn nlim_decode_weight(
    weight_bits: u32,
    cells: *const i8,
    len: usize,
    level_out: *mut i32,
) -> NlimStatus {
    if cells.is_null() || level_out.is_null() {
        return NlimStatus::NullArgument;
    }
    let scheme = match MultiBitScheme::for_bits(weight_bits) {
        Ok(s) => s,
        Err(e) => return status_of(&e),
    };
    if len != scheme.cells_per_weight {
        return NlimStatus::InvalidArgument;
    }
    let pattern = std::slice::from_raw_parts(cells, len);
    let enc = EncodedWeight {
        cell_weights: pattern.to_vec(),
        n_w: weight_bits,
    };
    match decode_multibit(&enc, &scheme) {
        Ok(level) => {
            *level_out = level;
            NlimStatus::Ok
        }
        Err(e) => status_of(&e),
    }
}
