//! C interface to `approval-nash`.
//!
//! Instances live behind opaque [`ApprovalInstance`] handles. Every call
//! returns an [`ApprovalStatus`]; results come back as NUL-terminated
//! UTF-8 strings (JSON for structured results) that the caller releases
//! with [`approval_string_free`]. On failure, [`approval_last_error`] holds
//! a message for the calling thread.
//!
//! Candidate sets and ballot profiles use the same text forms as the
//! command line: `a,b` for a set and `a,b;;c` for a profile.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use approval_nash::equilibrium::{
    construct_containment_pne, construct_sincere_pne, enumerate_equilibria, enumerate_lazy_pruned,
    ContainmentOutcome, EquilibriumCertificate, EquilibriumKind,
};
use approval_nash::harness::{format_rational, load_instance, parse_instance, parse_rational, serialize_instance};
use approval_nash::model::owa_utility;
use approval_nash::rules::elect;
use approval_nash::strategy::{brute_force_best_responses, LengthRestriction};
use approval_nash::{BallotProfile, ElectionInstance, Error, RuleSpec};
use serde_json::{json, Value};

/// Result code of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApprovalStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad candidate names, voter index out of range, malformed weights.
    Contract = 3,
    /// The analysis does not apply to this input.
    Precondition = 4,
    /// An exhaustive search would exceed its cap.
    Capacity = 5,
    Invariant = 6,
    Parse = 7,
    Config = 8,
    Io = 9,
    /// An enum argument is out of range.
    InvalidArgument = 10,
    Panic = 11,
}

/// Values for the `kind` argument of [`approval_find_pne`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApprovalEquilibriumKind {
    Plain = 0,
    Lazy = 1,
    Sincere = 2,
}

/// Values for the `kind` argument of [`approval_construct_pne`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApprovalConstruction {
    Containment = 0,
    Sincere = 1,
}

/// Opaque election instance.
pub struct ApprovalInstance {
    inner: ElectionInstance,
}

struct Failure {
    status: ApprovalStatus,
    message: String,
}

impl Failure {
    fn new(status: ApprovalStatus, message: impl Into<String>) -> Self {
        Failure {
            status,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Contract(_) => ApprovalStatus::Contract,
            Error::Precondition(_) => ApprovalStatus::Precondition,
            Error::Capacity { .. } => ApprovalStatus::Capacity,
            Error::Invariant(_) => ApprovalStatus::Invariant,
            Error::Parse { .. } => ApprovalStatus::Parse,
            Error::Config(_) => ApprovalStatus::Config,
            Error::Io(_) => ApprovalStatus::Io,
        };
        Failure::new(status, e.to_string())
    }
}

type Outcome<T> = Result<T, Failure>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("NULs removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Outcome<()>) -> ApprovalStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApprovalStatus::Ok,
        Ok(Err(failure)) => {
            set_last_error(&failure.message);
            failure.status
        }
        Err(_) => {
            set_last_error("internal panic");
            ApprovalStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Outcome<&'a str> {
    if p.is_null() {
        return Err(Failure::new(ApprovalStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(ApprovalStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn optional_text<'a>(p: *const c_char, what: &str) -> Outcome<Option<&'a str>> {
    if p.is_null() {
        Ok(None)
    } else {
        text(p, what).map(Some)
    }
}

unsafe fn instance<'a>(p: *const ApprovalInstance) -> Outcome<&'a ElectionInstance> {
    p.as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| Failure::new(ApprovalStatus::NullPointer, "instance handle is null"))
}

fn check_out<T>(out: *mut *mut T) -> Outcome<()> {
    if out.is_null() {
        Err(Failure::new(ApprovalStatus::NullPointer, "output pointer is null"))
    } else {
        Ok(())
    }
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Outcome<()> {
    let c = CString::new(s).map_err(|_| Failure::new(ApprovalStatus::Invariant, "result contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn write_json(out: *mut *mut c_char, v: Value) -> Outcome<()> {
    write_string(out, v.to_string())
}

// Null weights select standard AV; otherwise `w_1,...,w_m` in candidate order.
fn rule(instance: &ElectionInstance, weights: Option<&str>) -> Outcome<RuleSpec> {
    match weights {
        None => Ok(RuleSpec::standard_av(instance)),
        Some(list) => {
            let w = list
                .split(',')
                .map(|x| parse_rational(x.trim()).map_err(|e| Failure::new(ApprovalStatus::Contract, e)))
                .collect::<Outcome<Vec<_>>>()?;
            Ok(RuleSpec::candidate_weighted(instance, w)?)
        }
    }
}

fn certificate_json(instance: &ElectionInstance, c: &EquilibriumCertificate) -> Value {
    json!({
        "committee": instance.format_set(c.committee),
        "profile": c.profile.format(instance),
    })
}

/// Parses an instance from its text form.
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn approval_instance_parse(source: *const c_char, out: *mut *mut ApprovalInstance) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        let inner = parse_instance(text(source, "source")?)?;
        *out = Box::into_raw(Box::new(ApprovalInstance { inner }));
        Ok(())
    })
}

/// Loads an instance file.
///
/// # Safety
/// `path` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn approval_instance_load(path: *const c_char, out: *mut *mut ApprovalInstance) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        let inner = load_instance(std::path::Path::new(text(path, "path")?))?;
        *out = Box::into_raw(Box::new(ApprovalInstance { inner }));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `instance` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn approval_instance_free(instance: *mut ApprovalInstance) {
    if !instance.is_null() {
        drop(Box::from_raw(instance));
    }
}

/// Writes the number of candidates, voters and the committee size.
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn approval_instance_size(
    handle: *const ApprovalInstance,
    m: *mut usize,
    n: *mut usize,
    k: *mut usize,
) -> ApprovalStatus {
    guard(|| {
        let inst = instance(handle)?;
        if m.is_null() || n.is_null() || k.is_null() {
            return Err(Failure::new(ApprovalStatus::NullPointer, "output pointer is null"));
        }
        *m = inst.m();
        *n = inst.n();
        *k = inst.k();
        Ok(())
    })
}

/// The instance in its text form.
///
/// # Safety
/// `handle` and `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn approval_instance_serialize(
    handle: *const ApprovalInstance,
    out: *mut *mut c_char,
) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        write_string(out, serialize_instance(instance(handle)?))
    })
}

/// Runs the rule on a ballot profile. Result:
/// `{"committee": "{a,c}", "counts": [..]}`.
///
/// # Safety
/// `weights` may be null; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn approval_elect(
    handle: *const ApprovalInstance,
    weights: *const c_char,
    profile: *const c_char,
    out: *mut *mut c_char,
) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        let inst = instance(handle)?;
        let rule = rule(inst, optional_text(weights, "weights")?)?;
        let profile = BallotProfile::parse(inst, text(profile, "profile")?)?;
        let w = elect(&rule, inst, &profile)?;
        write_json(out, json!({"committee": inst.format_set(w), "counts": profile.counts(inst.m())}))
    })
}

/// OWA utility of a committee for one voter, as an exact rational `p/q`
/// (or an integer).
///
/// # Safety
/// All pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn approval_owa_utility(
    handle: *const ApprovalInstance,
    voter: usize,
    committee: *const c_char,
    out: *mut *mut c_char,
) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        let inst = instance(handle)?;
        let w = inst.parse_set(text(committee, "committee")?)?;
        write_string(out, format_rational(&owa_utility(inst, voter, w)?))
    })
}

/// Best responses of `voter` to `profile` (the voter's own entry is
/// ignored). `restriction >= m` means unrestricted.
///
/// # Safety
/// `weights` may be null; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn approval_best_response(
    handle: *const ApprovalInstance,
    weights: *const c_char,
    voter: usize,
    profile: *const c_char,
    restriction: usize,
    out: *mut *mut c_char,
) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        let inst = instance(handle)?;
        let rule = rule(inst, optional_text(weights, "weights")?)?;
        let others = BallotProfile::parse(inst, text(profile, "profile")?)?;
        let r = brute_force_best_responses(inst, &rule, voter, &others, LengthRestriction::AtMost(restriction))?;
        let sets = |v: &[approval_nash::Ballot]| v.iter().map(|&b| inst.format_set(b)).collect::<Vec<_>>();
        let restricted = r.restricted.as_ref().map(|x| {
            json!({
                "limit": x.limit,
                "utility": format_rational(&x.utility),
                "mbr_size": x.mbr_size,
                "mbr_ballots": sets(&x.mbr_ballots),
            })
        });
        write_json(
            out,
            json!({
                "voter": voter,
                "achievable_utility": format_rational(&r.achievable_utility),
                "br_ballots": sets(&r.br_ballots),
                "mbr_size": r.mbr_size,
                "mbr_ballots": sets(&r.mbr_ballots),
                "restricted": restricted,
            }),
        )
    })
}

/// Enumerates equilibria of one [`ApprovalEquilibriumKind`]. With `pruned`
/// (lazy kind, AV only) the pruned enumerator is used. An empty
/// `committees` list is a successful answer: no equilibrium exists.
///
/// # Safety
/// `weights` may be null; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn approval_find_pne(
    handle: *const ApprovalInstance,
    weights: *const c_char,
    kind: u32,
    pruned: bool,
    out: *mut *mut c_char,
) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        let inst = instance(handle)?;
        let rule = rule(inst, optional_text(weights, "weights")?)?;
        let kind = match kind {
            0 => EquilibriumKind::Plain,
            1 => EquilibriumKind::Lazy,
            2 => EquilibriumKind::Sincere,
            other => return Err(Failure::new(ApprovalStatus::InvalidArgument, format!("unknown equilibrium kind {other}"))),
        };
        let set = if pruned {
            if kind != EquilibriumKind::Lazy {
                return Err(Failure::new(ApprovalStatus::InvalidArgument, "pruned enumeration is for lazy equilibria"));
            }
            enumerate_lazy_pruned(inst, &rule)?
        } else {
            enumerate_equilibria(inst, &rule, kind)?
        };
        write_json(
            out,
            json!({
                "kind": kind.as_str(),
                "committees": set.committees.iter().map(|&w| inst.format_set(w)).collect::<Vec<_>>(),
                "certificates": set.certificates.iter().map(|c| certificate_json(inst, c)).collect::<Vec<_>>(),
                "profiles_examined": set.profiles_examined,
            }),
        )
    })
}

/// Builds an equilibrium with one of the [`ApprovalConstruction`]s (AV
/// only). `target` (containment only, may be null) names a committee to
/// test; `non_empty` (sincere only) makes abstainers approve everyone.
///
/// # Safety
/// `target` may be null; other pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn approval_construct_pne(
    handle: *const ApprovalInstance,
    kind: u32,
    non_empty: bool,
    target: *const c_char,
    out: *mut *mut c_char,
) -> ApprovalStatus {
    guard(|| {
        check_out(out)?;
        let inst = instance(handle)?;
        let av = RuleSpec::standard_av(inst);
        let doc = match kind {
            0 => {
                let target = optional_text(target, "target")?.map(|t| inst.parse_set(t)).transpose()?;
                match construct_containment_pne(inst, &av, target)? {
                    ContainmentOutcome::Certified(c) => {
                        let mut v = certificate_json(inst, &c);
                        v["outcome"] = json!("certified");
                        v
                    }
                    ContainmentOutcome::Impossible(f) => json!({
                        "outcome": "impossible",
                        "member": inst.name(f.member),
                        "excluded": inst.name(f.excluded),
                    }),
                }
            }
            1 => {
                let mut v = certificate_json(inst, &construct_sincere_pne(inst, &av, non_empty)?);
                v["outcome"] = json!("certified");
                v
            }
            other => return Err(Failure::new(ApprovalStatus::InvalidArgument, format!("unknown construction {other}"))),
        };
        write_json(out, doc)
    })
}

/// Message of the last failing call on this thread, or null. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn approval_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn approval_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version, a static string.
#[no_mangle]
pub extern "C" fn approval_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr().cast()
}
