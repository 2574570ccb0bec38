//! Regular sequences, the Koszul complex of the boundary coordinates on `gr Ñ`,
//! and `D̃ ⊗ ∧^• Θ̃(log) ⊗ Ñ` computing `D̃ ⊗^L_{D̃(log)} Ñ`.
//!
//! Sub-truncation: a summand carrying `ξ_I` keeps `N_q` below
//! `top − Σ_{i∈I boundary} e_i`, so multiplication by `x_i` into the next term is exact.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{
    k0_torsion_cancellation, rees_of_tower, strictness_check, unit, GradedReesModule, K0TorsionReport, TorsionReport,
};
use crate::algebra::{
    box_points, complex_cohomology, rank_of_vectors, FiniteComplex, MonomialLabel, Rational, SparseMatrixQ,
};
use crate::derham::{mask_indices, subsets, Cohomology};
use crate::error::{Error, Result};
use crate::geometry::TwistDivisor;
use crate::settings::Settings;
use crate::tower::LatticeTower;

type Vector = Vec<(usize, Rational)>;

fn rank(vs: &[Vector]) -> usize {
    rank_of_vectors(vs.iter().map(|v| v.as_slice()))
}

fn rank2(a: &[Vector], b: &[Vector]) -> usize {
    rank_of_vectors(a.iter().chain(b).map(|v| v.as_slice()))
}

/// `dim ker(W/(W∩S) → T/S')` for `f(S) ⊂ S'`: `rank[W|S] − rank S − (rank[fW|S'] − rank S')`.
fn defect(w: &[Vector], s: &[Vector], fw: &[Vector], s_tgt: &[Vector]) -> usize {
    let src = rank2(w, s) - rank(s);
    let tgt = rank2(fw, s_tgt) - rank(s_tgt);
    src - tgt
}

/// Nonempty subsets of the boundary variables, each in increasing order.
pub fn boundary_subsequences(ell: usize) -> Vec<Vec<usize>> {
    (1..=ell)
        .flat_map(|k| subsets(ell, k))
        .map(|m| mask_indices(m).into_iter().map(|i| i as usize).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceStep {
    pub sequence: Vec<usize>,
    pub var: usize,
    pub degree: usize,
    /// Dimension of the kernel of `x_var` on `N_p / (previous x's)`.
    pub defect: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegularSequenceReport {
    pub failures: Vec<SequenceStep>,
    pub steps_checked: usize,
    pub pass: bool,
}

/// `seq` is a regular sequence on every `N_p`: each `x_{i_t}` is injective on
/// `N_p / (x_{i_1}, …, x_{i_{t−1}})`, tested on sub-boxes.
pub fn regular_sequence_check(m: &GradedReesModule, seqs: &[Vec<usize>]) -> Result<RegularSequenceReport> {
    let mut failures = Vec::new();
    let mut steps_checked = 0;
    for seq in seqs {
        if let Some(&bad) = seq.iter().find(|&&i| i >= m.ell) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                n_vars: m.ell,
            });
        }
        for p in 0..=m.depth() {
            let cols: Vec<Vec<Vector>> = (0..m.n_vars).map(|i| m.x[i][p].columns()).collect();
            let image = |i: usize, bound: &[i64]| -> Vec<Vector> {
                m.below(p, bound).into_iter().map(|c| cols[i][c].clone()).collect()
            };
            for (t, &it) in seq.iter().enumerate() {
                let w_bound = m.lowered(&[it]);
                let w: Vec<Vector> = m.below(p, &w_bound).into_iter().map(unit).collect();
                let fw: Vec<Vector> = m.below(p, &w_bound).into_iter().map(|c| cols[it][c].clone()).collect();
                let mut s_src = Vec::new();
                let mut s_tgt = Vec::new();
                for &is in &seq[..t] {
                    s_src.extend(image(is, &m.lowered(&[it, is])));
                    s_tgt.extend(image(is, &m.lowered(&[is])));
                }
                let d = defect(&w, &s_src, &fw, &s_tgt);
                steps_checked += 1;
                if d > 0 {
                    failures.push(SequenceStep {
                        sequence: seq.clone(),
                        var: it,
                        degree: p,
                        defect: d,
                    });
                }
            }
        }
    }
    Ok(RegularSequenceReport {
        pass: failures.is_empty(),
        failures,
        steps_checked,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrKoszulReport {
    /// Per z-degree, the cohomology of `K(x_1, …, x_ℓ; N_p)`.
    pub per_degree: Vec<Cohomology>,
    pub pass: bool,
}

/// Koszul complex of the boundary coordinates on `N_p`, degrees `−ℓ..=0`.
fn x_koszul(m: &GradedReesModule, p: usize) -> Result<FiniteComplex> {
    let ell = m.ell;
    let mut bases: Vec<Vec<MonomialLabel>> = Vec::new();
    let mut maps: Vec<HashMap<(u32, usize), usize>> = Vec::new();
    for k in (0..=ell).rev() {
        let mut basis = Vec::new();
        let mut map = HashMap::new();
        for mask in subsets(ell, k) {
            let vars: Vec<usize> = mask_indices(mask).into_iter().map(|i| i as usize).collect();
            for idx in m.below(p, &m.lowered(&vars)) {
                let l = &m.pieces[p][idx];
                map.insert((mask, idx), basis.len());
                basis.push(MonomialLabel {
                    block: idx,
                    tag: vars.iter().map(|&i| i as i64).collect(),
                    exp: l.exp.clone(),
                    comp: l.comp,
                });
            }
        }
        bases.push(basis);
        maps.push(map);
    }
    let cols: Vec<Vec<Vector>> = (0..ell).map(|i| m.x[i][p].columns()).collect();
    let mut diffs = Vec::new();
    for s in 0..ell {
        let k = ell - s;
        let mut trip = Vec::new();
        for mask in subsets(ell, k) {
            let vars = mask_indices(mask);
            for idx in m.below(p, &m.lowered(&vars.iter().map(|&i| i as usize).collect::<Vec<_>>())) {
                let col = maps[s][&(mask, idx)];
                for (t, &i) in vars.iter().enumerate() {
                    let rest = mask & !(1 << i);
                    let sign = if t % 2 == 0 { Rational::one() } else { -Rational::one() };
                    for (r, v) in &cols[i as usize][idx] {
                        let row = *maps[s + 1]
                            .get(&(rest, *r))
                            .ok_or_else(|| Error::WindowOverflow(format!("x_{i} leaves the sub-box in degree {p}")))?;
                        trip.push((row, col, &sign * v));
                    }
                }
            }
        }
        diffs.push(SparseMatrixQ::from_triplets(bases[s + 1].len(), bases[s].len(), trip)?);
    }
    FiniteComplex::new(-(ell as i64), bases, diffs)
}

/// `K(x_1, …, x_ℓ; N_p)` has no cohomology below degree 0 for every `p`.
pub fn gr_koszul_acyclicity(m: &GradedReesModule) -> Result<GrKoszulReport> {
    let per_degree = (0..=m.depth())
        .map(|p| complex_cohomology(&x_koszul(m, p)?))
        .collect::<Result<Vec<_>>>()?;
    let pass = per_degree.iter().all(|h| h.iter().all(|(&d, &v)| d == 0 || v == 0));
    Ok(GrKoszulReport { per_degree, pass })
}

/// Basis key of `∂̃^α ⊗ ξ_I ⊗ n`: `(I, α, q, index of n in N_q)`.
type Key = (u32, Vec<i64>, usize, usize);

struct TensorTerm {
    labels: Vec<MonomialLabel>,
    index: HashMap<Key, usize>,
    keys: Vec<Key>,
}

fn sub_box(m: &GradedReesModule, mask: u32) -> Vec<i64> {
    let vars: Vec<usize> = mask_indices(mask)
        .into_iter()
        .map(|i| i as usize)
        .filter(|&i| i < m.ell)
        .collect();
    m.lowered(&vars)
}

fn tensor_term(m: &GradedReesModule, p: usize, k: usize) -> TensorTerm {
    let n = m.n_vars;
    let mut t = TensorTerm {
        labels: Vec::new(),
        index: HashMap::new(),
        keys: Vec::new(),
    };
    if k > p {
        return t;
    }
    for mask in subsets(n, k) {
        let bound = sub_box(m, mask);
        for a in 0..=(p - k) {
            let q = p - k - a;
            if q > m.depth() {
                continue;
            }
            for alpha in box_points(&vec![0; n], &vec![a as i64; n]) {
                if alpha.iter().sum::<i64>() != a as i64 {
                    continue;
                }
                for idx in m.below(q, &bound) {
                    let l = &m.pieces[q][idx];
                    let key = (mask, alpha.clone(), q, idx);
                    t.index.insert(key.clone(), t.labels.len());
                    t.keys.push(key);
                    let mut tag: Vec<i64> = mask_indices(mask);
                    tag.push(-1);
                    tag.extend(&alpha);
                    tag.push(q as i64);
                    t.labels.push(MonomialLabel {
                        block: idx,
                        tag,
                        exp: l.exp.clone(),
                        comp: l.comp,
                    });
                }
            }
        }
    }
    t
}

/// The complex in z-degree `p`, cohomological degrees `−n..=0`, together with
/// the basis keys of degree 0.
fn tensor_complex(
    m: &GradedReesModule,
    p: usize,
    settings: &Settings,
) -> Result<(FiniteComplex, Vec<Key>, HashMap<Key, usize>)> {
    if p > m.depth() {
        return Err(Error::Invalid(format!("z-degree {p} beyond depth {}", m.depth())));
    }
    let n = m.n_vars;
    let terms: Vec<TensorTerm> = (0..=n).rev().map(|k| tensor_term(m, p, k)).collect();
    settings.check_dim(terms.iter().map(|t| t.labels.len()).sum())?;
    let zc: Vec<Vec<Vector>> = m.z.iter().map(|z| z.columns()).collect();
    let xc: Vec<Vec<Vec<Vector>>> = m.x.iter().map(|v| v.iter().map(|x| x.columns()).collect()).collect();
    let xic: Vec<Vec<Vec<Vector>>> = m.xi.iter().map(|v| v.iter().map(|x| x.columns()).collect()).collect();
    let mut diffs = Vec::new();
    for s in 0..n {
        let (src, tgt) = (&terms[s], &terms[s + 1]);
        let mut trip = Vec::new();
        for (col, (mask, alpha, q, idx)) in src.keys.iter().enumerate() {
            let vars = mask_indices(*mask);
            for (t, &i) in vars.iter().enumerate() {
                let i = i as usize;
                let rest = mask & !(1 << i);
                let bound = sub_box(m, rest);
                let sign = if t % 2 == 0 { Rational::one() } else { -Rational::one() };
                let mut push = |alpha: &Vec<i64>, q: usize, v: &Vector, c: &Rational| -> Result<()> {
                    for (r, a) in v {
                        let l = &m.pieces[q][*r];
                        if l.exp.iter().zip(&bound).any(|(e, b)| e > b) {
                            continue;
                        }
                        let row = *tgt
                            .index
                            .get(&(rest, alpha.clone(), q, *r))
                            .ok_or_else(|| Error::WindowOverflow(format!("Koszul target missing in z-degree {p}")))?;
                        trip.push((row, col, c * a));
                    }
                    Ok(())
                };
                let mut raised = alpha.clone();
                raised[i] += 1;
                if i < m.ell {
                    push(&raised, *q, &xc[i][*q][*idx], &sign)?;
                    push(alpha, q + 1, &zc[*q][*idx], &-&sign)?;
                } else {
                    push(&raised, *q, &unit(*idx), &sign)?;
                }
                push(alpha, q + 1, &xic[i][*q][*idx], &-&sign)?;
            }
        }
        diffs.push(SparseMatrixQ::from_triplets(tgt.labels.len(), src.labels.len(), trip)?);
    }
    let last = terms.last().expect("n + 1 terms");
    let (keys, index) = (last.keys.clone(), last.index.clone());
    let bases = terms.into_iter().map(|t| t.labels).collect();
    let c = FiniteComplex::new(-(n as i64), bases, diffs)?;
    c.check_d_squared()?;
    Ok((c, keys, index))
}

/// `D̃ ⊗_𝒪̃ ∧^• Θ̃(log) ⊗_𝒪̃ Ñ` in z-degree `p`.
pub fn koszul_tensor_complex(m: &GradedReesModule, p: usize, settings: &Settings) -> Result<FiniteComplex> {
    Ok(tensor_complex(m, p, settings)?.0)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KoszulTensorReport {
    /// Per z-degree, the cohomology of the tensor complex.
    pub cohomology: Vec<Cohomology>,
    /// Per `p < depth`, the kernel of `z: H⁰_p → H⁰_{p+1}` on classes one step inside the sub-box.
    pub h0_z_kernel: Vec<usize>,
    pub negative_vanish: bool,
    pub strict_h0: bool,
    pub pass: bool,
}

fn images(c: &FiniteComplex) -> Vec<Vector> {
    match c.differential(-1) {
        Some(d) => d.columns(),
        None => Vec::new(),
    }
}

/// `H^{<0} = 0` and `H⁰` is z-torsion free on the interior of the sub-box.
pub fn koszul_tensor_check(m: &GradedReesModule, settings: &Settings) -> Result<KoszulTensorReport> {
    let d = m.depth();
    let built = (0..=d)
        .map(|p| tensor_complex(m, p, settings))
        .collect::<Result<Vec<_>>>()?;
    let cohomology = built
        .iter()
        .map(|(c, _, _)| complex_cohomology(c))
        .collect::<Result<Vec<_>>>()?;
    let negative_vanish = cohomology.iter().all(|h| h.iter().all(|(&k, &v)| k == 0 || v == 0));
    let inner = m.lowered(&(0..m.ell).collect::<Vec<_>>());
    let zc: Vec<Vec<Vector>> = m.z.iter().map(|z| z.columns()).collect();
    let mut h0_z_kernel = Vec::new();
    for p in 0..d {
        let (c, keys, _) = &built[p];
        let (c1, _, index1) = &built[p + 1];
        let mut w = Vec::new();
        let mut zw = Vec::new();
        for (pos, (mask, alpha, q, idx)) in keys.iter().enumerate() {
            let l = &m.pieces[*q][*idx];
            if l.exp.iter().zip(&inner).any(|(e, b)| e > b) {
                continue;
            }
            w.push(unit(pos));
            let mut v = Vec::new();
            for (r, a) in &zc[*q][*idx] {
                let row = *index1
                    .get(&(*mask, alpha.clone(), q + 1, *r))
                    .ok_or_else(|| Error::WindowOverflow(format!("z leaves the sub-box in z-degree {}", p + 1)))?;
                v.push((row, a.clone()));
            }
            v.sort_by_key(|(r, _)| *r);
            zw.push(v);
        }
        h0_z_kernel.push(defect(&w, &images(c), &zw, &images(c1)));
    }
    let strict_h0 = h0_z_kernel.iter().all(|&k| k == 0);
    Ok(KoszulTensorReport {
        cohomology,
        h0_z_kernel,
        negative_vanish,
        strict_h0,
        pass: negative_vanish && strict_h0,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReesChecks {
    pub torsion: TorsionReport,
    pub regular_sequences: RegularSequenceReport,
    pub gr_koszul: GrKoszulReport,
    pub koszul_tensor: KoszulTensorReport,
    pub k0: K0TorsionReport,
    pub pass: bool,
}

/// All Rees-side checks on `⊕ E_p(D + Δ) z^p` with the sub-box `exp ≤ top`.
pub fn rees_checks(t: &LatticeTower, delta: &TwistDivisor, top: &[i64], settings: &Settings) -> Result<ReesChecks> {
    let m = rees_of_tower(t, delta, top, settings)?;
    m.check_relations()?;
    let torsion = strictness_check(&m)?;
    let regular_sequences = regular_sequence_check(&m, &boundary_subsequences(m.ell))?;
    let gr_koszul = gr_koszul_acyclicity(&m)?;
    let koszul_tensor = koszul_tensor_check(&m, settings)?;
    let k0 = k0_torsion_cancellation(&m)?;
    let pass = torsion.strict && regular_sequences.pass && gr_koszul.pass && koszul_tensor.pass && k0.cancels;
    Ok(ReesChecks {
        torsion,
        regular_sequences,
        gr_koszul,
        koszul_tensor,
        k0,
        pass,
    })
}
