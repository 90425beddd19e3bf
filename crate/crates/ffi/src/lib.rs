//! C ABI over `gcdlab`.
//!
//! Rule sets and samplers are exposed as opaque handles created by a
//! `*_new`/`*_from_*` function and released with the matching `*_free`.
//! Fallible calls return a [`GcdlabStatus`]; the message for the most recent
//! failure on the calling thread is available from
//! [`gcdlab_last_error_message`]. No call unwinds across the boundary: a
//! Rust panic is caught and reported as `GCDLAB_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::slice;

use gcdlab::number_theory::ExponentCaps;
use gcdlab::numeral::{decode_int, encode_int, Token, TokenSeq};
use gcdlab::oracle::{self, GrokSpec, RuleSet};
use gcdlab::sampling::{make_training_stream, LogRounding, OperandDist, OutcomeDist, SamplerConfig, TrainingStream};
use gcdlab::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcdlabStatus {
    Ok = 0,
    InvalidArgument = 1,
    Parse = 2,
    Ingest = 3,
    Io = 4,
    NullPointer = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Operand law; values for `GcdlabSamplerConfig::operand_dist`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcdlabOperandDist {
    Uniform = 0,
    LogUniform = 1,
}

/// Outcome law; values for `GcdlabSamplerConfig::outcome_dist`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcdlabOutcomeDist {
    Natural = 0,
    MixUniform = 1,
    LogUniform = 2,
    InvSqrt = 3,
    InvPower15 = 4,
    Uniform = 5,
}

/// Rounding of log-uniform draws; values for `GcdlabSamplerConfig::log_rounding`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GcdlabLogRounding {
    Floor = 0,
    Nearest = 1,
}

/// Sampler settings. The enum-valued fields are plain integers so that an
/// out-of-range value from C is reported instead of being undefined.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GcdlabSamplerConfig {
    pub max_operand: u64,
    pub kmax: u64,
    /// A `GcdlabOperandDist` value.
    pub operand_dist: u32,
    /// A `GcdlabOutcomeDist` value.
    pub outcome_dist: u32,
    /// Only read when `outcome_dist` is `GCDLAB_OUTCOME_DIST_MIX_UNIFORM`.
    pub mix_rho: f64,
    /// A `GcdlabLogRounding` value.
    pub log_rounding: u32,
    pub seed: u64,
    pub shard: u64,
}

/// Opaque rule set.
pub struct GcdlabRuleSet {
    inner: RuleSet,
}

/// Opaque training-pair stream.
pub struct GcdlabSampler {
    inner: TrainingStream,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn fail(status: GcdlabStatus, message: &str) -> GcdlabStatus {
    set_error(message);
    status
}

fn from_error(e: &Error) -> GcdlabStatus {
    let status = match e {
        Error::InvalidArgument(_) => GcdlabStatus::InvalidArgument,
        Error::Parse { .. } => GcdlabStatus::Parse,
        Error::Ingest { .. } => GcdlabStatus::Ingest,
        Error::Io(_) => GcdlabStatus::Io,
    };
    fail(status, &e.to_string())
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), GcdlabStatus>) -> GcdlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GcdlabStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(GcdlabStatus::Panic, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, GcdlabStatus>;
}

impl<T> OrStatus<T> for gcdlab::Result<T> {
    fn or_status(self) -> Result<T, GcdlabStatus> {
        self.map_err(|e| from_error(&e))
    }
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), GcdlabStatus> {
    if p.is_null() {
        Err(fail(GcdlabStatus::NullPointer, &format!("{what} is null")))
    } else {
        Ok(())
    }
}

/// Message for the last failed call on this thread; empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gcdlab_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

#[no_mangle]
pub extern "C" fn gcdlab_gcd(a: u64, b: u64) -> u64 {
    gcdlab::number_theory::gcd(a, b)
}

/// Writes the base-`base` digits of `n` (most significant first, sign token
/// omitted) to `digits`. `*len` receives the digit count; when `capacity`
/// is too small nothing is written and `GCDLAB_STATUS_BUFFER_TOO_SMALL` is
/// returned.
///
/// # Safety
/// `digits` must point to `capacity` writable `uint32_t`; `len` must be valid
/// for writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_encode(
    n: u64,
    base: u32,
    digits: *mut u32,
    capacity: usize,
    len: *mut usize,
) -> GcdlabStatus {
    guard(|| {
        non_null(len, "len")?;
        let seq = encode_int(n, base).or_status()?;
        let ds: Vec<u32> = seq.digits().collect();
        *len = ds.len();
        if ds.len() > capacity {
            return Err(fail(
                GcdlabStatus::BufferTooSmall,
                &format!("{} digits needed, capacity {capacity}", ds.len()),
            ));
        }
        non_null(digits, "digits")?;
        slice::from_raw_parts_mut(digits, ds.len()).copy_from_slice(&ds);
        Ok(())
    })
}

/// Decodes `len` digits (most significant first, no sign) into `*out`.
///
/// # Safety
/// `digits` must point to `len` readable `uint32_t`; `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_decode(digits: *const u32, len: usize, base: u32, out: *mut u64) -> GcdlabStatus {
    guard(|| {
        non_null(out, "out")?;
        if len > 0 {
            non_null(digits, "digits")?;
        }
        let mut tokens = vec![Token::Sign];
        if len > 0 {
            tokens.extend(slice::from_raw_parts(digits, len).iter().map(|&d| Token::Digit(d)));
        }
        let seq = TokenSeq::from_tokens(tokens, base).or_status()?;
        *out = decode_int(&seq).or_status()?;
        Ok(())
    })
}

/// Closed-form accuracy of a model that learns every product of the
/// primes of `base`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_theoretical_accuracy(base: u64, out: *mut f64) -> GcdlabStatus {
    guard(|| {
        non_null(out, "out")?;
        *out = oracle::theoretical_accuracy_base(base).or_status()?;
        Ok(())
    })
}

fn boxed_rule_set(rs: RuleSet, out: *mut *mut GcdlabRuleSet) {
    // SAFETY: callers check `out` for null first.
    unsafe { *out = Box::into_raw(Box::new(GcdlabRuleSet { inner: rs })) };
}

/// Builds a bundled preset, truncated at `cap` (0 means 100).
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_rule_set_from_preset(
    name: *const c_char,
    cap: u64,
    out: *mut *mut GcdlabRuleSet,
) -> GcdlabStatus {
    guard(|| {
        non_null(name, "name")?;
        non_null(out, "out")?;
        let name = CStr::from_ptr(name)
            .to_str()
            .map_err(|_| fail(GcdlabStatus::InvalidArgument, "preset name is not UTF-8"))?;
        let preset = oracle::preset(name)
            .ok_or_else(|| fail(GcdlabStatus::InvalidArgument, &format!("unknown preset {name:?}")))?;
        let cap = if cap == 0 { oracle::DEFAULT_CAP } else { cap };
        boxed_rule_set(preset.rule_set(Some(cap)).or_status()?, out);
        Ok(())
    })
}

/// Builds the rule set for `base` with per-prime exponent caps
/// (`cap_primes[i]` capped at `cap_exponents[i]`, unlisted primes uncapped)
/// and grokked prime powers, truncated at `cap` (0 means 100).
///
/// # Safety
/// `cap_primes` and `cap_exponents` must each hold `ncaps` elements, `grok`
/// must hold `ngrok` elements (either may be null when its count is 0), and
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_rule_set_build(
    base: u64,
    cap_primes: *const u64,
    cap_exponents: *const u32,
    ncaps: usize,
    grok: *const u64,
    ngrok: usize,
    cap: u64,
    out: *mut *mut GcdlabRuleSet,
) -> GcdlabStatus {
    guard(|| {
        non_null(out, "out")?;
        let mut caps = ExponentCaps::unbounded();
        if ncaps > 0 {
            non_null(cap_primes, "cap_primes")?;
            non_null(cap_exponents, "cap_exponents")?;
            let ps = slice::from_raw_parts(cap_primes, ncaps);
            let es = slice::from_raw_parts(cap_exponents, ncaps);
            for (&p, &e) in ps.iter().zip(es) {
                caps = caps.with(p, e);
            }
        }
        let grok = if ngrok > 0 {
            non_null(grok, "grok")?;
            GrokSpec::new(slice::from_raw_parts(grok, ngrok).iter().copied()).or_status()?
        } else {
            GrokSpec::none()
        };
        let cap = if cap == 0 { oracle::DEFAULT_CAP } else { cap };
        boxed_rule_set(oracle::build_rule_set(base, &caps, &grok, Some(cap)).or_status()?, out);
        Ok(())
    })
}

/// Number of elements, or 0 for a null handle.
///
/// # Safety
/// `rs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_rule_set_len(rs: *const GcdlabRuleSet) -> usize {
    rs.as_ref().map_or(0, |r| r.inner.len())
}

/// Copies the elements in increasing order; same buffer protocol as
/// [`gcdlab_encode`].
///
/// # Safety
/// `rs` must be a live handle, `out` must point to `capacity` writable
/// `uint64_t` and `len` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_rule_set_elements(
    rs: *const GcdlabRuleSet,
    out: *mut u64,
    capacity: usize,
    len: *mut usize,
) -> GcdlabStatus {
    guard(|| {
        non_null(rs, "rule set")?;
        non_null(len, "len")?;
        let rs = &(*rs).inner;
        *len = rs.len();
        if rs.len() > capacity {
            return Err(fail(GcdlabStatus::BufferTooSmall, "element buffer too small"));
        }
        non_null(out, "out")?;
        for (slot, d) in slice::from_raw_parts_mut(out, rs.len()).iter_mut().zip(rs.elements()) {
            *slot = d;
        }
        Ok(())
    })
}

/// Prediction of the rule-based model for gcd `k`: the largest element
/// dividing `k`. Returns 0 for a null handle or `k == 0`.
///
/// # Safety
/// `rs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_rule_set_predict(rs: *const GcdlabRuleSet, k: u64) -> u64 {
    match rs.as_ref() {
        Some(r) if k > 0 => oracle::predict_f(k, &r.inner),
        _ => 0,
    }
}

/// Accuracy on uniformly drawn pairs; NaN for a null handle.
///
/// # Safety
/// `rs` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_rule_set_exact_accuracy(rs: *const GcdlabRuleSet) -> f64 {
    rs.as_ref().map_or(f64::NAN, |r| oracle::exact_accuracy(&r.inner))
}

/// # Safety
/// `rs` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_rule_set_free(rs: *mut GcdlabRuleSet) {
    if !rs.is_null() {
        drop(Box::from_raw(rs));
    }
}

/// Default settings: operands up to 10^6, gcd up to 100, uniform operands,
/// natural outcomes, floor rounding, seed 0, shard 0.
#[no_mangle]
pub extern "C" fn gcdlab_sampler_config_default() -> GcdlabSamplerConfig {
    let d = SamplerConfig::default();
    GcdlabSamplerConfig {
        max_operand: d.max_operand,
        kmax: d.kmax,
        operand_dist: GcdlabOperandDist::Uniform as u32,
        outcome_dist: GcdlabOutcomeDist::Natural as u32,
        mix_rho: gcdlab::sampling::DEFAULT_MIX_RHO,
        log_rounding: GcdlabLogRounding::Floor as u32,
        seed: d.seed,
        shard: d.shard_id,
    }
}

fn to_config(c: &GcdlabSamplerConfig) -> Result<SamplerConfig, GcdlabStatus> {
    let bad = |what: &str, v: u32| fail(GcdlabStatus::InvalidArgument, &format!("unknown {what} {v}"));
    let operand_dist = match c.operand_dist {
        0 => OperandDist::Uniform,
        1 => OperandDist::LogUniform,
        v => return Err(bad("operand_dist", v)),
    };
    let outcome_dist = match c.outcome_dist {
        0 => OutcomeDist::Natural,
        1 => OutcomeDist::MixUniform(c.mix_rho),
        2 => OutcomeDist::LogUniform,
        3 => OutcomeDist::InvSqrt,
        4 => OutcomeDist::InvPower1_5,
        5 => OutcomeDist::Uniform,
        v => return Err(bad("outcome_dist", v)),
    };
    let log_rounding = match c.log_rounding {
        0 => LogRounding::Floor,
        1 => LogRounding::Nearest,
        v => return Err(bad("log_rounding", v)),
    };
    Ok(SamplerConfig {
        max_operand: c.max_operand,
        kmax: c.kmax,
        operand_dist,
        outcome_dist,
        log_rounding,
        seed: c.seed,
        shard_id: c.shard,
    })
}

/// # Safety
/// `config` must point to a readable config and `out` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_sampler_new(
    config: *const GcdlabSamplerConfig,
    out: *mut *mut GcdlabSampler,
) -> GcdlabStatus {
    guard(|| {
        non_null(config, "config")?;
        non_null(out, "out")?;
        let stream = make_training_stream(to_config(&*config)?).or_status()?;
        *out = Box::into_raw(Box::new(GcdlabSampler { inner: stream }));
        Ok(())
    })
}

/// Draws the next pair and its gcd.
///
/// # Safety
/// `sampler` must be a live handle; `a`, `b` and `g` must be valid for
/// writes.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_sampler_next(
    sampler: *mut GcdlabSampler,
    a: *mut u64,
    b: *mut u64,
    g: *mut u64,
) -> GcdlabStatus {
    guard(|| {
        non_null(sampler, "sampler")?;
        for (p, what) in [(a, "a"), (b, "b"), (g, "g")] {
            non_null(p, what)?;
        }
        let pair = (*sampler).inner.next().expect("training streams are infinite");
        *a = pair.a;
        *b = pair.b;
        *g = pair.g;
        Ok(())
    })
}

/// # Safety
/// `sampler` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gcdlab_sampler_free(sampler: *mut GcdlabSampler) {
    if !sampler.is_null() {
        drop(Box::from_raw(sampler));
    }
}
