//! One suite on one case: the computation, its verdict and its evidence.

use std::collections::BTreeMap;
use std::time::Instant;

use loglattice::charclass::{
    cohomology_report, global_tower, hypercohomology, kclass_report, lhs_k_class, standard_twists,
};
use loglattice::connection::local_formal_type_of;
use loglattice::derham::{check_alpha, check_beta, check_filtered_qis_p_sigma};
use loglattice::rees::{boundary_subsequences, euler_bijectivity, localization_check, rees_checks, ReesChecks};
use loglattice::settings::{stabilize_by, Settings};
use loglattice::{closed_form_tower, dm_lattice, irregularity, is_regular_singular, tower, WeightWindow};
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::Item;
use crate::spec::{Case, CurveCase, FormalCase, Suite};

pub struct Outcome {
    pub outputs: Value,
    pub pass: bool,
    pub stable: bool,
    pub warnings: Vec<String>,
}

impl Outcome {
    pub fn new<T: Serialize>(outputs: &T, pass: bool, stable: bool) -> Self {
        Outcome {
            outputs: serde_json::to_value(outputs).expect("reports serialize"),
            pass,
            stable,
            warnings: Vec::new(),
        }
    }

    fn warn_if(mut self, cond: bool, msg: &str) -> Self {
        if cond {
            self.warnings.push(msg.into());
        }
        self
    }
}

pub type OpResult = Result<Outcome, String>;

/// Time `f` and wrap its outcome in a report item.
pub fn item(name: String, operation: &str, inputs: Value, expect_failure: bool, f: impl FnOnce() -> OpResult) -> Item {
    let start = Instant::now();
    let r = f();
    let elapsed_ms = start.elapsed().as_millis() as u64;
    match r {
        Ok(o) => Item {
            name,
            operation: operation.into(),
            inputs,
            expect_failure,
            pass: if expect_failure { !o.pass } else { o.pass && o.stable },
            outputs: Some(o.outputs),
            stable: o.stable,
            warnings: o.warnings,
            error: None,
            elapsed_ms,
        },
        Err(e) => Item {
            name,
            operation: operation.into(),
            inputs,
            expect_failure,
            outputs: None,
            stable: false,
            pass: false,
            warnings: Vec::new(),
            error: Some(format!("{operation}: {e}")),
            elapsed_ms,
        },
    }
}

fn err(e: loglattice::Error) -> String {
    e.to_string()
}

pub fn run(suite: Suite, case: &Case, s: &Settings) -> OpResult {
    match case {
        Case::Formal(c) => run_formal(suite, c, s),
        Case::Curve(c) => run_curve(suite, c, s),
    }
}

/// Verdict of the Rees checks that must not depend on the sub-box.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
struct ReesVerdict {
    strict: bool,
    torsion_length: usize,
    regular_sequences: bool,
    gr_koszul: bool,
    negative_vanish: bool,
    strict_h0: bool,
    k0_cancels: bool,
}

impl From<&ReesChecks> for ReesVerdict {
    fn from(r: &ReesChecks) -> Self {
        ReesVerdict {
            strict: r.torsion.strict,
            torsion_length: r.torsion.torsion_length,
            regular_sequences: r.regular_sequences.pass,
            gr_koszul: r.gr_koszul.pass,
            negative_vanish: r.koszul_tensor.negative_vanish,
            strict_h0: r.koszul_tensor.strict_h0,
            k0_cancels: r.k0.cancels,
        }
    }
}

/// Sub-box corner for the Rees module on a window: its upper corner.
pub fn rees_top(w: &WeightWindow) -> Vec<i64> {
    w.hi.clone()
}

fn run_formal(suite: Suite, c: &FormalCase, s: &Settings) -> OpResult {
    let conn = &c.conn;
    let w = &c.window;
    match suite {
        Suite::Tower => {
            let seed = dm_lattice(conn).map_err(err)?;
            let t = tower(&seed, c.depth).map_err(err)?;
            let closed_form_equal = (0..=c.depth)
                .map(|d| Ok(tower(&seed, d)?.levels == closed_form_tower(conn, d).levels))
                .collect::<loglattice::Result<Vec<bool>>>()
                .map_err(err)?;
            let nested = t.is_nested();
            let pass = nested && closed_form_equal.iter().all(|&e| e);
            Ok(Outcome::new(
                &json!({"levels": t.levels, "closed_form_equal": closed_form_equal, "nested": nested}),
                pass,
                true,
            ))
        }
        Suite::Irregularity => {
            let disc = conn.n_vars() == 1 && conn.ell() == 1;
            let irr = if disc {
                Some(irregularity(conn).map_err(err)?)
            } else {
                None
            };
            let poles: Vec<Vec<u32>> = conn.blocks.iter().map(|b| b.pole_divisor()).collect();
            let regular = is_regular_singular(conn).map_err(err)?;
            Ok(Outcome::new(
                &json!({"irregularity": irr, "pole_divisors": poles, "regular_singular": regular}),
                true,
                true,
            ))
        }
        Suite::Alpha => {
            let t = tower(&dm_lattice(conn).map_err(err)?, c.depth).map_err(err)?;
            let r = check_alpha(&t, &c.delta, w, s).map_err(err)?;
            Ok(Outcome::new(&r, r.pass, r.stable))
        }
        Suite::Beta => {
            let r = check_beta(conn, &c.delta, w, s).map_err(err)?;
            let stable = r.lattice.stable && r.localization.stable && r.p_sigma.as_ref().is_none_or(|p| p.stable);
            Ok(Outcome::new(&r, r.pass, stable))
        }
        Suite::PSigma => {
            let r = check_filtered_qis_p_sigma(conn, &c.delta, w, s).map_err(err)?;
            Ok(Outcome::new(&r, r.pass, r.stable))
        }
        Suite::Euler => {
            let sets: Vec<(Vec<usize>, usize)> = boundary_subsequences(conn.ell())
                .into_iter()
                .filter(|set| !set.is_empty())
                .flat_map(|set| set.clone().into_iter().map(move |j| (set.clone(), j)))
                .collect();
            let st = stabilize_by(
                s,
                w,
                |w| {
                    sets.iter()
                        .map(|(set, j)| euler_bijectivity(conn, &c.delta, set, *j, EULER_K_MAX, w))
                        .collect::<loglattice::Result<Vec<_>>>()
                },
                |a, b| {
                    a.iter()
                        .zip(b)
                        .all(|(x, y)| x.pass == y.pass && x.vacuous_blocks == y.vacuous_blocks)
                },
            )
            .map_err(err)?;
            let pass = st.value.iter().all(|r| r.pass);
            let vacuous = st.value.iter().all(|r| r.bands_checked == 0);
            let verdicts: Vec<Vec<bool>> = st.evidence.iter().map(|v| v.iter().map(|r| r.pass).collect()).collect();
            Ok(Outcome::new(
                &json!({"restrictions": st.value, "all_vacuous": vacuous, "evidence": verdicts}),
                pass,
                st.stable,
            ))
        }
        Suite::Localization => {
            let st = stabilize_by(
                s,
                w,
                |w| localization_check(conn, &c.delta, w),
                |a, b| a.pass == b.pass && a.expected_slope == b.expected_slope && a.vacuous == b.vacuous,
            )
            .map_err(err)?;
            let verdicts: Vec<bool> = st.evidence.iter().map(|r| r.pass).collect();
            Ok(Outcome::new(
                &json!({"report": st.value, "evidence": verdicts}),
                st.value.pass,
                st.stable,
            ))
        }
        Suite::Rees => {
            let t = tower(&dm_lattice(conn).map_err(err)?, c.depth).map_err(err)?;
            let st = stabilize_by(
                s,
                w,
                |w| rees_checks(&t, &c.delta, &rees_top(w), s),
                |a, b| ReesVerdict::from(a) == ReesVerdict::from(b),
            )
            .map_err(err)?;
            let verdicts: Vec<ReesVerdict> = st.evidence.iter().map(ReesVerdict::from).collect();
            Ok(Outcome::new(
                &json!({"top": rees_top(w), "report": st.value, "evidence": verdicts}),
                st.value.pass,
                st.stable,
            )
            .warn_if(
                st.value.torsion.cap_reached,
                "torsion filtration still grows at the deepest power",
            ))
        }
        Suite::Spencer => {
            let r = loglattice::charclass::spencer_side_change_check(conn, &c.delta, w, c.depth, s).map_err(err)?;
            Ok(Outcome::new(&r, r.pass, r.stable))
        }
        Suite::Cohomology | Suite::Kclass | Suite::P0 => Err(format!("`{}` needs a curve document", suite.name())),
    }
}

pub const EULER_K_MAX: i64 = 8;

fn run_curve(suite: Suite, c: &CurveCase, s: &Settings) -> OpResult {
    let conn = &c.conn;
    match suite {
        Suite::Tower => {
            let t = global_tower(conn, c.depth).map_err(err)?;
            let degrees: Vec<Vec<i64>> = t
                .levels
                .iter()
                .map(|l| l.iter().map(|b| b.degree()).collect())
                .collect();
            Ok(Outcome::new(
                &json!({"levels": t.levels, "degrees": degrees, "local": t.local}),
                true,
                true,
            ))
        }
        Suite::Irregularity => {
            let mut by_point = BTreeMap::new();
            for p in conn.boundary.points() {
                let irr: u64 = conn
                    .summands
                    .iter()
                    .map(|f| local_formal_type_of(f, p).irregularity() as u64)
                    .sum();
                by_point.insert(p.to_string(), irr);
            }
            let total: u64 = by_point.values().sum();
            Ok(Outcome::new(&json!({"by_point": by_point, "total": total}), true, true))
        }
        Suite::Cohomology => {
            let base = c.window.hi[0];
            let r = cohomology_report(conn, base, s).map_err(err)?;
            let mut pass = r.pass;
            let mut extra = None;
            if !standard_twists(&conn.boundary).contains(&c.delta) {
                let t = global_tower(conn, 1).map_err(err)?;
                let h = hypercohomology(&t, &c.delta).map_err(err)?;
                pass &= h.h2 == 0 && (h.h0, h.h1) == r.oracle.value;
                extra = Some(json!({"delta": c.delta, "hypercohomology": h}));
            }
            let stable = r.oracle.stable;
            Ok(Outcome::new(
                &json!({"report": r, "requested_twist": extra}),
                pass,
                stable,
            ))
        }
        Suite::Kclass => {
            let r = kclass_report(conn).map_err(err)?;
            let at_cap = r.lhs.p0.p0 == r.lhs.p0.cap;
            Ok(Outcome::new(&r, r.pass, true).warn_if(at_cap, "p0 reached the cap"))
        }
        Suite::P0 => {
            let t = global_tower(conn, 1).map_err(err)?;
            let lhs = lhs_k_class(conn, &t).map_err(err)?;
            let p = &lhs.p0;
            let ok = |k: usize| p.checked.iter().any(|&(q, a)| q == k && a);
            let pass = p.found && ok(p.p0 + 1) && ok(p.p0 + 2);
            Ok(Outcome::new(
                &json!({"p0": p, "slope": lhs.slope, "degrees": lhs.degrees}),
                pass,
                true,
            )
            .warn_if(p.p0 == p.cap, "p0 reached the cap"))
        }
        _ => Err(format!("`{}` needs a formal document", suite.name())),
    }
}
