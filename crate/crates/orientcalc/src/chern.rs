//! Splitting-principle Chern calculus: symmetric-function reduction, Whitney
//! products, formal-group-law twisted duals and line-bundle tensors, and
//! Chern classes of quotient bundles.
//!
//! Non-split bundles are handled exclusively by the formal-roots route:
//! adjoin fresh root variables, compute there, reduce symmetric output to
//! elementary symmetric polynomials, and substitute the actual Chern
//! classes back in. The reduction is the classical leading-monomial
//! elimination with the roots ordered `r1 > r2 > ...`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::ring::{QuotientRing, RingElement, Variable};

/// A vector bundle presented either by Chern roots (split form) or by its
/// Chern classes `c_1..c_n` (general form, `c_0 = 1` implicit).
#[derive(Debug, Clone, PartialEq)]
pub enum BundleRep {
    Roots(Vec<RingElement>),
    Classes(Vec<RingElement>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct BundleData {
    ring: QuotientRing,
    rep: BundleRep,
}

impl BundleData {
    /// A split bundle given by weight-1 Chern roots.
    pub fn from_roots(ring: &QuotientRing, roots: Vec<RingElement>) -> Result<Self> {
        for r in &roots {
            if r.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if !r.is_homogeneous_of(1) {
                return Err(Error::NotHomogeneous(vec![r.weight_of().unwrap_or(0)]));
            }
        }
        Ok(BundleData { ring: ring.clone(), rep: BundleRep::Roots(roots) })
    }

    /// A bundle given by Chern classes `c_1..c_n`; `c_k` must be homogeneous
    /// of weight `k`.
    pub fn from_classes(ring: &QuotientRing, classes: Vec<RingElement>) -> Result<Self> {
        for (k, c) in classes.iter().enumerate() {
            if c.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if !c.is_homogeneous_of(k as i64 + 1) {
                return Err(Error::NotHomogeneous(vec![c.weight_of().unwrap_or(0)]));
            }
        }
        Ok(BundleData { ring: ring.clone(), rep: BundleRep::Classes(classes) })
    }

    /// The rank-0 bundle (total class 1).
    pub fn trivial_rank0(ring: &QuotientRing) -> Self {
        BundleData { ring: ring.clone(), rep: BundleRep::Classes(Vec::new()) }
    }

    /// The trivial bundle of rank `n` (all roots zero).
    pub fn trivial(ring: &QuotientRing, n: usize) -> Self {
        BundleData { ring: ring.clone(), rep: BundleRep::Roots(vec![ring.zero(); n]) }
    }

    pub fn ring(&self) -> &QuotientRing {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        match &self.rep {
            BundleRep::Roots(r) => r.len(),
            BundleRep::Classes(c) => c.len(),
        }
    }

    pub fn roots(&self) -> Option<&[RingElement]> {
        match &self.rep {
            BundleRep::Roots(r) => Some(r),
            BundleRep::Classes(_) => None,
        }
    }

    /// Chern classes `c_1..c_n`; for a split bundle these are the elementary
    /// symmetric polynomials of the roots.
    pub fn chern_classes(&self) -> Result<Vec<RingElement>> {
        match &self.rep {
            BundleRep::Classes(c) => Ok(c.clone()),
            BundleRep::Roots(roots) => elementary_from_roots(&self.ring, roots),
        }
    }

    /// The total Chern class `1 + c_1 + ... + c_n`.
    pub fn total_class(&self) -> Result<RingElement> {
        let mut acc = self.ring.one();
        for c in self.chern_classes()? {
            acc = acc.add(&c)?;
        }
        Ok(acc)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let (key, elems) = match &self.rep {
            BundleRep::Roots(r) => ("roots", r),
            BundleRep::Classes(c) => ("classes", c),
        };
        serde_json::json!({
            "rank": self.rank(),
            key: elems.iter().map(|e| e.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ring: &QuotientRing, value: &serde_json::Value) -> Result<Self> {
        #[derive(Serialize, Deserialize)]
        struct BundleJson {
            rank: usize,
            #[serde(default)]
            roots: Option<Vec<serde_json::Value>>,
            #[serde(default)]
            classes: Option<Vec<serde_json::Value>>,
        }
        let json: BundleJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Config(format!("bad bundle json: {e}")))?;
        let parse = |elems: &[serde_json::Value]| -> Result<Vec<RingElement>> {
            elems
                .iter()
                .map(|v| RingElement::from_json(ring, v))
                .collect()
        };
        let out = match (&json.roots, &json.classes) {
            (Some(r), None) => Self::from_roots(ring, parse(r)?)?,
            (None, Some(c)) => Self::from_classes(ring, parse(c)?)?,
            _ => {
                return Err(Error::Config(
                    "bundle json needs exactly one of `roots` or `classes`".into(),
                ))
            }
        };
        if out.rank() != json.rank {
            return Err(Error::Config(format!(
                "bundle rank {} does not match {} entries",
                json.rank,
                out.rank()
            )));
        }
        Ok(out)
    }
}

/// `c_k = e_k(roots)`: coefficients of `prod_i (X + r_i)`.
pub fn elementary_from_roots(
    ring: &QuotientRing,
    roots: &[RingElement],
) -> Result<Vec<RingElement>> {
    let mut coeffs: Vec<RingElement> = vec![ring.one()];
    for r in roots {
        let mut next = vec![ring.zero(); coeffs.len() + 1];
        for (k, c) in coeffs.iter().enumerate() {
            next[k] = next[k].add(c)?;
            next[k + 1] = next[k + 1].add(&c.mul(r)?)?;
        }
        coeffs = next;
    }
    Ok(coeffs[1..].to_vec())
}

/// Express a polynomial symmetric in the designated root variables as a
/// polynomial in their elementary symmetric functions.
///
/// Returns the result in a ring with the root variables replaced by fresh
/// variables `e_names` (of weights `1..=n`), appended after the remaining
/// variables. Errors with `NotSymmetric` when `p` is not invariant under
/// all transpositions of the roots.
pub fn express_in_elementary(
    p: &RingElement,
    root_names: &[&str],
    e_names: &[&str],
) -> Result<RingElement> {
    let ring = p.ring().clone();
    let n = root_names.len();

    // symmetry check: invariance under adjacent transpositions
    for w in 0..n.saturating_sub(1) {
        let mut map = BTreeMap::new();
        for v in ring.variables() {
            map.insert(v.name.clone(), ring.var(&v.name)?);
        }
        map.insert(root_names[w].to_string(), ring.var(root_names[w + 1])?);
        map.insert(root_names[w + 1].to_string(), ring.var(root_names[w])?);
        if p.substitute(&map, &ring)? != *p {
            return Err(Error::NotSymmetric);
        }
    }
    express_in_elementary_unchecked(p, root_names, e_names)
}

/// The elimination loop of [`express_in_elementary`] without the symmetry
/// pre-check, for callers whose input is symmetric by construction. A
/// non-decreasing leading exponent still aborts with `NotSymmetric`.
fn express_in_elementary_unchecked(
    p: &RingElement,
    root_names: &[&str],
    e_names: &[&str],
) -> Result<RingElement> {
    let ring = p.ring().clone();
    let n = root_names.len();
    if e_names.len() != n {
        return Err(Error::Config("need one e-name per root".into()));
    }
    let root_idx: Vec<usize> = root_names
        .iter()
        .map(|r| ring.var_index(r))
        .collect::<Result<_>>()?;

    // output ring: drop the roots, append e_1..e_n
    let kept: Vec<Variable> = ring
        .variables()
        .iter()
        .filter(|v| !root_names.contains(&v.name.as_str()))
        .cloned()
        .collect();
    let mut out_vars = kept;
    for (k, e) in e_names.iter().enumerate() {
        out_vars.push(Variable::new(*e, k as i64 + 1));
    }
    let out_ring = QuotientRing::new(out_vars, ring.truncation())?;

    let elementary: Vec<RingElement> = {
        let roots: Vec<RingElement> = root_names
            .iter()
            .map(|r| ring.var(r))
            .collect::<Result<_>>()?;
        elementary_from_roots(&ring, &roots)?
    };

    let mut work = p.clone();
    let mut out = out_ring.zero();
    let mut e_pows: BTreeMap<(usize, u32), RingElement> = BTreeMap::new();
    while !work.is_zero() {
        // lex-leading root part across all terms
        let lead = work
            .iter_terms()
            .map(|(exps, _)| root_idx.iter().map(|&i| exps[i]).collect::<Vec<u32>>())
            .max()
            .expect("nonzero element has terms");
        if lead.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::NotSymmetric);
        }
        // coefficient of the leading root monomial, roots stripped
        let mut coeff_terms = Vec::new();
        for (exps, c) in work.iter_terms() {
            let root_part: Vec<u32> = root_idx.iter().map(|&i| exps[i]).collect();
            if root_part == lead {
                let mut stripped = exps.to_vec();
                for &i in &root_idx {
                    stripped[i] = 0;
                }
                coeff_terms.push((stripped, c.clone()));
            }
        }
        let coeff = RingElement::from_raw_terms(&ring, coeff_terms)?;

        // e-monomial exponents: mu_k = lead_k - lead_{k+1}
        let mut mu = vec![0u32; n];
        for k in 0..n {
            mu[k] = lead[k] - lead.get(k + 1).copied().unwrap_or(0);
        }

        // out += coeff * e^mu, with the coefficient mapped by name
        let mut term = map_by_name(&coeff, &out_ring)?;
        for (k, &m) in mu.iter().enumerate() {
            if m > 0 {
                term = term.mul(&out_ring.var(e_names[k])?.pow(m)?)?;
            }
        }
        out = out.add(&term)?;

        // work -= coeff * prod e_k(roots)^mu_k, with the powers memoized
        let mut back = coeff;
        for (k, &m) in mu.iter().enumerate() {
            if m > 0 {
                if let std::collections::btree_map::Entry::Vacant(v) = e_pows.entry((k, m)) {
                    v.insert(elementary[k].pow(m)?);
                }
                back = back.mul(&e_pows[&(k, m)])?;
            }
        }
        work = work.sub(&back)?;
    }
    Ok(out)
}

/// Map an element into another ring by matching variable names; every
/// variable actually used must exist in the target.
pub(crate) fn map_by_name(e: &RingElement, target: &QuotientRing) -> Result<RingElement> {
    let mut map = BTreeMap::new();
    for (i, v) in e.ring().variables().iter().enumerate() {
        if e.iter_terms().any(|(exps, _)| exps[i] > 0) {
            map.insert(v.name.clone(), target.var(&v.name)?);
        }
    }
    e.substitute(&map, target)
}

/// Whitney product: the total class of a direct sum is the product of the
/// total classes; ranks add.
pub fn whitney_total(a: &BundleData, b: &BundleData) -> Result<BundleData> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    let total = a.total_class()?.mul(&b.total_class()?)?;
    let rank = a.rank() + b.rank();
    classes_from_total(a.ring(), &total, rank)
}

/// Split an inhomogeneous total class into `c_1..c_rank` by weight.
pub fn classes_from_total(
    ring: &QuotientRing,
    total: &RingElement,
    rank: usize,
) -> Result<BundleData> {
    let classes: Vec<RingElement> = (1..=rank as i64)
        .map(|k| total.weight_component(k))
        .collect();
    BundleData::from_classes(ring, classes)
}

/// The dual bundle: roots map through the formal inverse series `m`.
///
/// For a bundle in `Classes` form the computation runs on formal roots and
/// reduces back through elementary symmetric polynomials, which is exact
/// only when products of more than `D` positive-weight generators vanish in
/// the bundle's ring.
pub fn dual_bundle(f: &FormalGroupLaw, b: &BundleData) -> Result<BundleData> {
    let m = f.formal_inverse()?;
    match &b.rep {
        BundleRep::Roots(roots) => {
            let dual_roots: Vec<RingElement> = roots
                .iter()
                .map(|r| r.eval_series(&m.coeffs).map_err(tail_error(f)))
                .collect::<Result<_>>()?;
            BundleData::from_roots(b.ring(), dual_roots)
        }
        BundleRep::Classes(_) => via_formal_roots(f, b, None, true),
    }
}

/// Twist by a line bundle with first Chern class `l`: the roots of
/// `L (x) E` are `F(l, r_i)`.
pub fn twist_by_line(
    f: &FormalGroupLaw,
    l: &RingElement,
    b: &BundleData,
) -> Result<BundleData> {
    if l.ring() != b.ring() {
        return Err(Error::RingMismatch);
    }
    if !l.is_homogeneous_of(1) {
        return Err(Error::NotHomogeneous(vec![l.weight_of().unwrap_or(0)]));
    }
    match &b.rep {
        BundleRep::Roots(roots) => {
            let twisted: Vec<RingElement> = roots
                .iter()
                .map(|r| f.formal_sum(l, r))
                .collect::<Result<_>>()?;
            BundleData::from_roots(b.ring(), twisted)
        }
        BundleRep::Classes(_) => via_formal_roots(f, b, Some(l), false),
    }
}

fn tail_error(f: &FormalGroupLaw) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::NonTerminating => Error::TruncationTooSmall {
            needed: i64::MAX,
            have: f.degree_bound() as i64,
        },
        other => other,
    }
}

/// Chern classes of a quotient bundle from the exact sequence
/// `0 -> S -> E -> Q -> 0`: `c(Q) = c(E) * c(S)^(-1)`.
pub fn quotient_chern(big: &BundleData, sub: &BundleData) -> Result<BundleData> {
    if big.ring() != sub.ring() {
        return Err(Error::RingMismatch);
    }
    if sub.rank() > big.rank() {
        return Err(Error::Config("subbundle rank exceeds the total rank".into()));
    }
    let total = big.total_class()?.mul(&sub.total_class()?.invert_unit()?)?;
    classes_from_total(big.ring(), &total, big.rank() - sub.rank())
}

/// Run a twist (`line = Some`) or dual (`line = None`) on formal roots and
/// reduce back to Chern classes of the original ring.
fn via_formal_roots(
    f: &FormalGroupLaw,
    b: &BundleData,
    line: Option<&RingElement>,
    dual: bool,
) -> Result<BundleData> {
    let ring = b.ring().clone();
    let n = b.rank();
    let d = f.degree_bound() as i64;

    // exactness window of the real ring: dropped series terms beyond D are
    // products of more than D positive-weight factors and must die there
    let window = ring.positive_window().ok_or(Error::NonTerminating)?;
    let needs_full_series = dual || !f.is_exact();
    if needs_full_series && window > d {
        return Err(Error::TruncationTooSmall { needed: window, have: d });
    }
    if n == 0 {
        return Ok(BundleData::trivial_rank0(&ring));
    }

    // scratch ring: coefficient symbols of F, a stand-in for the line class,
    // and the formal roots. Each scratch variable is capped at the window:
    // any symmetric component carrying a higher power maps to a class of
    // weight above the window and dies in the real ring anyway. The caps
    // kill whole permutation orbits, so symmetry is preserved. No weight
    // truncation here: the window sum of the scratch variables would exceed
    // it.
    let cap = (window + 1).max(2) as u32;
    let mut scratch_vars: Vec<Variable> = f.coeff_ring().variables().to_vec();
    let t_name = fresh_name("t", &ring, &scratch_vars);
    scratch_vars.push(Variable::nilpotent(&t_name, 1, cap));
    let mut root_names: Vec<String> = Vec::with_capacity(n);
    for i in 1..=n {
        let name = fresh_name(&format!("r{i}"), &ring, &scratch_vars);
        scratch_vars.push(Variable::nilpotent(&name, 1, cap));
        root_names.push(name);
    }
    let scratch = QuotientRing::new(scratch_vars, None)?;

    // transformed roots in the scratch ring
    let t = scratch.var(&t_name)?;
    let m = f.formal_inverse()?;
    let mut new_roots = Vec::with_capacity(n);
    for rn in &root_names {
        let r = scratch.var(rn)?;
        let u = if dual {
            poly_eval_series(&m.coeffs, &r)?
        } else {
            poly_formal_sum(f, &t, &r)?
        };
        new_roots.push(u);
    }
    let new_elementary = elementary_from_roots(&scratch, &new_roots)?;

    // reduce each class to elementary symmetric functions of the roots and
    // substitute the real data back in
    let e_names: Vec<String> = (1..=n)
        .map(|i| fresh_name(&format!("e{i}"), &ring, &[]))
        .collect();
    let classes = b.chern_classes()?;
    let mut out_classes = Vec::with_capacity(n);
    for ck in &new_elementary {
        let root_refs: Vec<&str> = root_names.iter().map(|s| s.as_str()).collect();
        let e_refs: Vec<&str> = e_names.iter().map(|s| s.as_str()).collect();
        // symmetric by construction: permuting the formal roots permutes
        // the factors of each elementary symmetric polynomial
        let sym = express_in_elementary_unchecked(ck, &root_refs, &e_refs)?;
        // substitution: coefficient vars by name, t -> l, e_k -> c_k(E);
        // unused variables need no image
        let mut map = BTreeMap::new();
        for v in sym.ring().variables() {
            if v.name == t_name {
                if let Some(l) = line {
                    map.insert(v.name.clone(), l.clone());
                }
            } else if let Some(k) = e_names.iter().position(|e| *e == v.name) {
                map.insert(v.name.clone(), classes[k].clone());
            } else if ring.var_index(&v.name).is_ok() {
                map.insert(v.name.clone(), ring.var(&v.name)?);
            }
        }
        out_classes.push(sym.substitute(&map, &ring)?);
    }
    BundleData::from_classes(&ring, out_classes)
}

/// Evaluate a truncated series on a scratch polynomial without the
/// per-element nilpotency proof (the caller justifies exactness through the
/// real ring's window).
fn poly_eval_series(coeffs: &[RingElement], x: &RingElement) -> Result<RingElement> {
    let ring = x.ring().clone();
    let mut acc = ring.zero();
    let mut power = ring.one();
    for (k, c) in coeffs.iter().enumerate() {
        if k > 0 {
            power = power.mul(x)?;
            if power.is_zero() {
                break;
            }
        }
        if !c.is_zero() {
            acc = acc.add(&ring.transport(c)?.mul(&power)?)?;
        }
    }
    Ok(acc)
}

/// `F(a, b)` on scratch polynomials, without the window guard.
fn poly_formal_sum(
    f: &FormalGroupLaw,
    a: &RingElement,
    b: &RingElement,
) -> Result<RingElement> {
    let ring = a.ring().clone();
    let d = f.degree_bound();
    let mut a_pows: Vec<RingElement> = vec![ring.one()];
    let mut b_pows: Vec<RingElement> = vec![ring.one()];
    for k in 1..=d as usize {
        a_pows.push(a_pows[k - 1].mul(a)?);
        b_pows.push(b_pows[k - 1].mul(b)?);
    }
    let mut acc = ring.zero();
    for i in 0..=d {
        for j in 0..=d - i {
            if i + j == 0 {
                continue;
            }
            let c = f.coeff(i, j)?;
            if c.is_zero() {
                continue;
            }
            let term = a_pows[i as usize].mul(&b_pows[j as usize])?;
            if term.is_zero() {
                continue;
            }
            acc = acc.add(&ring.transport(&c)?.mul(&term)?)?;
        }
    }
    Ok(acc)
}

/// Pick a variable name clashing neither with the real ring nor with the
/// already chosen scratch variables.
fn fresh_name(base: &str, ring: &QuotientRing, taken: &[Variable]) -> String {
    let clashes = |name: &str| {
        ring.variables().iter().any(|v| v.name == name)
            || taken.iter().any(|v| v.name == name)
    };
    if !clashes(base) {
        return base.to_string();
    }
    let mut k = 0;
    loop {
        let cand = format!("{base}_{k}");
        if !clashes(&cand) {
            return cand;
        }
        k += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    fn free_ring(names: &[&str]) -> QuotientRing {
        QuotientRing::new(
            names.iter().map(|n| Variable::new(*n, 1)).collect(),
            None,
        )
        .unwrap()
    }

    #[test]
    fn elementary_from_roots_examples() {
        let r = free_ring(&["x", "y"]);
        let x = r.var("x").unwrap();
        let y = r.var("y").unwrap();
        let cs = elementary_from_roots(&r, std::slice::from_ref(&x)).unwrap();
        assert_eq!(cs, vec![x.clone()]);
        let cs = elementary_from_roots(&r, &[x.clone(), y.clone()]).unwrap();
        assert_eq!(cs[0], x.add(&y).unwrap());
        assert_eq!(cs[1], x.mul(&y).unwrap());
        let cs = elementary_from_roots(&r, &[x.clone(), x.clone()]).unwrap();
        assert_eq!(cs[0], x.scale(&rat(2)));
        assert_eq!(cs[1], x.pow(2).unwrap());
    }

    #[test]
    fn express_in_elementary_textbook() {
        let r = free_ring(&["r1", "r2"]);
        let r1 = r.var("r1").unwrap();
        let r2 = r.var("r2").unwrap();

        // r1^2 + r2^2 = e1^2 - 2 e2
        let p = r1.pow(2).unwrap().add(&r2.pow(2).unwrap()).unwrap();
        let out = express_in_elementary(&p, &["r1", "r2"], &["e1", "e2"]).unwrap();
        let er = out.ring().clone();
        let e1 = er.var("e1").unwrap();
        let e2 = er.var("e2").unwrap();
        assert_eq!(out, e1.pow(2).unwrap().sub(&e2.scale(&rat(2))).unwrap());

        // r1 r2 = e2
        let p = r1.mul(&r2).unwrap();
        let out = express_in_elementary(&p, &["r1", "r2"], &["e1", "e2"]).unwrap();
        assert_eq!(out, out.ring().var("e2").unwrap());

        // r1^2 r2 + r1 r2^2 = e1 e2
        let p = r1
            .pow(2)
            .unwrap()
            .mul(&r2)
            .unwrap()
            .add(&r1.mul(&r2.pow(2).unwrap()).unwrap())
            .unwrap();
        let out = express_in_elementary(&p, &["r1", "r2"], &["e1", "e2"]).unwrap();
        let er = out.ring().clone();
        assert_eq!(
            out,
            er.var("e1").unwrap().mul(&er.var("e2").unwrap()).unwrap()
        );
    }

    #[test]
    fn express_rejects_asymmetric() {
        let r = free_ring(&["r1", "r2"]);
        let p = r.var("r1").unwrap();
        assert_eq!(
            express_in_elementary(&p, &["r1", "r2"], &["e1", "e2"]),
            Err(Error::NotSymmetric)
        );
    }

    #[test]
    fn whitney_examples() {
        let r = QuotientRing::new(
            vec![
                Variable::nilpotent("x", 1, 2),
                Variable::nilpotent("y", 1, 2),
            ],
            None,
        )
        .unwrap();
        let x = r.var("x").unwrap();
        let y = r.var("y").unwrap();
        let lx = BundleData::from_roots(&r, vec![x.clone()]).unwrap();
        let ly = BundleData::from_roots(&r, vec![y.clone()]).unwrap();
        let sum = whitney_total(&lx, &ly).unwrap();
        assert_eq!(sum.rank(), 2);
        let cs = sum.chern_classes().unwrap();
        assert_eq!(cs[0], x.add(&y).unwrap());
        assert_eq!(cs[1], x.mul(&y).unwrap());

        // a trivial rank-0 summand leaves classes unchanged
        let trivial = BundleData::trivial_rank0(&r);
        let same = whitney_total(&lx, &trivial).unwrap();
        assert_eq!(same.chern_classes().unwrap(), lx.chern_classes().unwrap());
    }

    #[test]
    fn dual_bundle_roots() {
        let r = QuotientRing::new(vec![Variable::nilpotent("x", 1, 3)], None).unwrap();
        let x = r.var("x").unwrap();
        let b = BundleData::from_roots(&r, vec![x.clone()]).unwrap();

        let add = FormalGroupLaw::additive(4);
        let dual = dual_bundle(&add, &b).unwrap();
        assert_eq!(dual.roots().unwrap()[0], x.neg());

        // multiplicative: m(x) = -x + beta x^2 (x^3 = 0)
        let mult = FormalGroupLaw::multiplicative(4);
        let rm = QuotientRing::new(
            vec![Variable::new("beta", -1), Variable::nilpotent("x", 1, 3)],
            None,
        )
        .unwrap();
        let x = rm.var("x").unwrap();
        let beta = rm.var("beta").unwrap();
        let b = BundleData::from_roots(&rm, vec![x.clone()]).unwrap();
        let dual = dual_bundle(&mult, &b).unwrap();
        let expect = x.neg().add(&beta.mul(&x.pow(2).unwrap()).unwrap()).unwrap();
        assert_eq!(dual.roots().unwrap()[0], expect);
    }

    #[test]
    fn dual_bundle_classes_additive_rank2() {
        // additive dual of classes (c1, c2) is (-c1, c2)
        let f = FormalGroupLaw::additive(6);
        let r = QuotientRing::new(
            vec![
                Variable::nilpotent("u", 1, 3),
                Variable::nilpotent("v", 1, 3),
            ],
            None,
        )
        .unwrap();
        let u = r.var("u").unwrap();
        let v = r.var("v").unwrap();
        let c1 = u.add(&v).unwrap();
        let c2 = u.mul(&v).unwrap();
        let b = BundleData::from_classes(&r, vec![c1.clone(), c2.clone()]).unwrap();
        let dual = dual_bundle(&f, &b).unwrap();
        let cs = dual.chern_classes().unwrap();
        assert_eq!(cs[0], c1.neg());
        assert_eq!(cs[1], c2);
    }

    #[test]
    fn twist_examples() {
        // additive rank 2: c2(L (x) E) = l^2 + c1 l + c2
        let f = FormalGroupLaw::additive(6);
        let r = QuotientRing::new(
            vec![
                Variable::nilpotent("l", 1, 3),
                Variable::nilpotent("u", 1, 3),
                Variable::nilpotent("v", 1, 3),
            ],
            None,
        )
        .unwrap();
        let l = r.var("l").unwrap();
        let u = r.var("u").unwrap();
        let v = r.var("v").unwrap();
        let b = BundleData::from_roots(&r, vec![u.clone(), v.clone()]).unwrap();
        let tw = twist_by_line(&f, &l, &b).unwrap();
        let cs = tw.chern_classes().unwrap();
        let c1 = u.add(&v).unwrap();
        let c2 = u.mul(&v).unwrap();
        let expect = l
            .pow(2)
            .unwrap()
            .add(&c1.mul(&l).unwrap())
            .unwrap()
            .add(&c2)
            .unwrap();
        assert_eq!(cs[1], expect);

        // twisting by l = 0 changes nothing
        let tw0 = twist_by_line(&f, &r.zero(), &b).unwrap();
        assert_eq!(tw0.chern_classes().unwrap(), b.chern_classes().unwrap());

        // multiplicative rank 1: c1 = l + x + beta l x
        let fm = FormalGroupLaw::multiplicative(4);
        let rm = QuotientRing::new(
            vec![
                Variable::new("beta", -1),
                Variable::nilpotent("l", 1, 2),
                Variable::nilpotent("x", 1, 2),
            ],
            None,
        )
        .unwrap();
        let l = rm.var("l").unwrap();
        let x = rm.var("x").unwrap();
        let beta = rm.var("beta").unwrap();
        let b = BundleData::from_roots(&rm, vec![x.clone()]).unwrap();
        let tw = twist_by_line(&fm, &l, &b).unwrap();
        let expect = l
            .add(&x)
            .unwrap()
            .add(&beta.mul(&l.mul(&x).unwrap()).unwrap())
            .unwrap();
        assert_eq!(tw.chern_classes().unwrap()[0], expect);
    }

    #[test]
    fn twist_classes_agrees_with_roots() {
        // same computation through the formal-roots route
        let f = FormalGroupLaw::generic(6).unwrap();
        let ring = f
            .coeff_ring()
            .extend(vec![
                Variable::nilpotent("l", 1, 2),
                Variable::nilpotent("u", 1, 2),
                Variable::nilpotent("v", 1, 3),
            ])
            .unwrap();
        let l = ring.var("l").unwrap();
        let u = ring.var("u").unwrap();
        let v = ring.var("v").unwrap();
        let split = BundleData::from_roots(&ring, vec![u.clone(), v.clone()]).unwrap();
        let as_classes =
            BundleData::from_classes(&ring, split.chern_classes().unwrap()).unwrap();

        let tw_roots = twist_by_line(&f, &l, &split).unwrap();
        let tw_classes = twist_by_line(&f, &l, &as_classes).unwrap();
        assert_eq!(
            tw_roots.chern_classes().unwrap(),
            tw_classes.chern_classes().unwrap()
        );
    }

    #[test]
    fn dual_twice_is_identity_on_roots() {
        let f = FormalGroupLaw::generic(6).unwrap();
        let ring = f
            .coeff_ring()
            .extend(vec![Variable::nilpotent("x", 1, 4)])
            .unwrap();
        let x = ring.var("x").unwrap();
        let b = BundleData::from_roots(&ring, vec![x.clone()]).unwrap();
        let back = dual_bundle(&f, &dual_bundle(&f, &b).unwrap()).unwrap();
        assert_eq!(back.roots().unwrap()[0], x);
    }

    #[test]
    fn quotient_examples() {
        let r = QuotientRing::new(
            vec![
                Variable::nilpotent("e1", 1, 4),
                Variable::nilpotent("xi", 1, 3),
            ],
            None,
        )
        .unwrap();
        let e1 = r.var("e1").unwrap();
        let xi = r.var("xi").unwrap();
        let big = BundleData::from_classes(&r, vec![e1.clone(), r.zero()]).unwrap();
        let sub = BundleData::from_roots(&r, vec![xi.clone()]).unwrap();
        let q = quotient_chern(&big, &sub).unwrap();
        assert_eq!(q.rank(), 1);
        // c(Q) = (1 + e1)(1 - xi + xi^2); the weight-1 part is e1 - xi
        assert_eq!(q.chern_classes().unwrap()[0], e1.sub(&xi).unwrap());

        // trivial subbundle leaves the classes unchanged
        let q = quotient_chern(&big, &BundleData::trivial_rank0(&r)).unwrap();
        assert_eq!(q.chern_classes().unwrap(), big.chern_classes().unwrap());
    }

    #[test]
    fn quotient_undoes_whitney() {
        let r = QuotientRing::new(
            vec![
                Variable::nilpotent("x", 1, 3),
                Variable::nilpotent("y", 1, 3),
            ],
            None,
        )
        .unwrap();
        let x = r.var("x").unwrap();
        let y = r.var("y").unwrap();
        let a = BundleData::from_roots(&r, vec![x]).unwrap();
        let b = BundleData::from_roots(&r, vec![y]).unwrap();
        let sum = whitney_total(&a, &b).unwrap();
        let back = quotient_chern(&sum, &a).unwrap();
        assert_eq!(back.chern_classes().unwrap(), b.chern_classes().unwrap());
    }
}
