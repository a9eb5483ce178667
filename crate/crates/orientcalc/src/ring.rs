//! Exact sparse multivariate polynomial arithmetic over the rationals with an
//! integer weight grading, quotient normal forms (nilpotency truncation and
//! triangular monic relations), unit inversion and substitution.
//!
//! Every cohomology class handled by the other modules is a [`RingElement`] of
//! some [`QuotientRing`]. Rings are immutable after construction and cheap to
//! clone; all operations are pure functions, so values can be shared freely
//! between threads.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Shorthand for an exact rational coefficient.
pub type Rational = BigRational;

/// Build a rational from an integer.
pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// Build a rational from numerator and denominator.
pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A graded polynomial variable.
///
/// `weight` is the Tate twist; the cohomological degree of every class in
/// scope is twice its weight, so only the weight is stored. A `nilpotency`
/// of `k` means the relation `v^k = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub weight: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nilpotency: Option<u32>,
}

impl Variable {
    pub fn new(name: impl Into<String>, weight: i64) -> Self {
        Variable { name: name.into(), weight, nilpotency: None }
    }

    pub fn nilpotent(name: impl Into<String>, weight: i64, order: u32) -> Self {
        Variable { name: name.into(), weight, nilpotency: Some(order) }
    }
}

/// Exponent vector of a monomial, aligned with the ring's variable order.
///
/// Ordered graded-lexicographically: first by total degree, then
/// lexicographically on the exponents. This fixes the storage and
/// serialization order of every polynomial.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub(crate) Vec<u32>);

impl Monomial {
    fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    fn var(nvars: usize, idx: usize) -> Self {
        let mut e = vec![0; nvars];
        e[idx] = 1;
        Monomial(e)
    }

    fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        // ascending total degree; within a degree, earlier variables first
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse term map in canonical form: no zero coefficients stored.
type Terms = BTreeMap<Monomial, Rational>;

fn add_term(terms: &mut Terms, m: Monomial, c: Rational) {
    if c.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match terms.entry(m) {
        Entry::Vacant(v) => {
            v.insert(c);
        }
        Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// A monic relation `v^degree = rhs`, with `rhs` of strictly smaller
/// `v`-degree and involving no later variable.
#[derive(Debug, Clone, PartialEq)]
struct Relation {
    degree: u32,
    rhs: Terms,
}

#[derive(Debug, PartialEq)]
struct RingData {
    vars: Vec<Variable>,
    relations: Vec<Option<Relation>>,
    truncation: Option<i64>,
}

/// A graded polynomial ring over the rationals, presented by an ordered list
/// of variables, triangular monic relations and an optional symmetric weight
/// truncation (`|weight| > W` is discarded).
///
/// The relation system is triangular — each relation rewrites a power of one
/// variable into earlier variables and lower powers of itself — so normal
/// forms exist and are unique, and no Gröbner basis machinery is needed.
#[derive(Debug, Clone)]
pub struct QuotientRing(Arc<RingData>);

impl PartialEq for QuotientRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || *self.0 == *other.0
    }
}

impl Eq for QuotientRing {}

impl QuotientRing {
    /// The rational numbers: no variables, no truncation.
    pub fn rationals() -> Self {
        Self::new(Vec::new(), None).expect("empty ring is always valid")
    }

    /// Build a ring from variables (nilpotencies become relations) and an
    /// optional weight truncation.
    pub fn new(vars: Vec<Variable>, truncation: Option<i64>) -> Result<Self> {
        if let Some(w) = truncation {
            if w < 0 {
                return Err(Error::Config(format!("negative truncation {w}")));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for v in &vars {
            if !seen.insert(v.name.clone()) {
                return Err(Error::Config(format!("duplicate variable `{}`", v.name)));
            }
            if let Some(k) = v.nilpotency {
                if k < 1 {
                    return Err(Error::Config(format!("nilpotency 0 on `{}`", v.name)));
                }
            }
        }
        let relations = vars
            .iter()
            .map(|v| v.nilpotency.map(|k| Relation { degree: k, rhs: Terms::new() }))
            .collect();
        Ok(QuotientRing(Arc::new(RingData { vars, relations, truncation })))
    }

    /// Extend this ring with additional variables appended after the existing
    /// ones. Relations and truncation carry over.
    pub fn extend(&self, vars: Vec<Variable>) -> Result<Self> {
        let mut all = self.0.vars.clone();
        all.extend(vars);
        let fresh = Self::new(all, self.0.truncation)?;
        let mut relations = fresh.0.relations.clone();
        for (i, rel) in self.0.relations.iter().enumerate() {
            relations[i] = rel.clone();
        }
        Ok(QuotientRing(Arc::new(RingData {
            vars: fresh.0.vars.clone(),
            relations,
            truncation: self.0.truncation,
        })))
    }

    /// Return a new ring equal to this one plus the monic relation
    /// `v^degree = rhs`. `rhs` must have `v`-degree `< degree` and involve no
    /// variable later than `v`.
    pub fn with_monic_relation(&self, var: &str, degree: u32, rhs: &RingElement) -> Result<Self> {
        let idx = self.var_index(var)?;
        if degree < 1 {
            return Err(Error::Config(format!("monic relation of degree 0 on `{var}`")));
        }
        // rhs may come from this ring or a relation-free copy with the same variables
        if rhs.ring.0.vars != self.0.vars {
            return Err(Error::RingMismatch);
        }
        for m in rhs.terms.keys() {
            if m.0[idx] >= degree {
                return Err(Error::Config(format!(
                    "relation rhs has `{var}`-degree >= {degree}"
                )));
            }
            if m.0[idx + 1..].iter().any(|&e| e > 0) {
                return Err(Error::Config(format!(
                    "relation rhs involves a variable later than `{var}`"
                )));
            }
        }
        // rewriting must preserve monomial weights, or truncation would not
        // commute with reduction
        let lhs_weight = degree as i64 * self.0.vars[idx].weight;
        if !rhs.is_homogeneous_of(lhs_weight) {
            return Err(Error::Config(format!(
                "relation rhs must be homogeneous of weight {lhs_weight}"
            )));
        }
        if self.0.relations[idx].is_some() {
            return Err(Error::Config(format!("variable `{var}` already has a relation")));
        }
        let mut relations = self.0.relations.clone();
        relations[idx] = Some(Relation { degree, rhs: rhs.terms.clone() });
        Ok(QuotientRing(Arc::new(RingData {
            vars: self.0.vars.clone(),
            relations,
            truncation: self.0.truncation,
        })))
    }

    pub fn variables(&self) -> &[Variable] {
        &self.0.vars
    }

    pub fn truncation(&self) -> Option<i64> {
        self.0.truncation
    }

    /// Replace the truncation window (`None` removes it).
    pub fn with_truncation(&self, truncation: Option<i64>) -> Result<Self> {
        if let Some(w) = truncation {
            if w < 0 {
                return Err(Error::Config(format!("negative truncation {w}")));
            }
        }
        Ok(QuotientRing(Arc::new(RingData {
            vars: self.0.vars.clone(),
            relations: self.0.relations.clone(),
            truncation,
        })))
    }

    pub fn var_index(&self, name: &str) -> Result<usize> {
        self.0
            .vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UndeclaredVariable(name.to_string()))
    }

    /// The degree of the monic relation bounding `name`, if any (for a
    /// nilpotency `v^k = 0` this is `k`).
    pub fn variable_bound(&self, name: &str) -> Option<u32> {
        let idx = self.var_index(name).ok()?;
        self.0.relations[idx].as_ref().map(|r| r.degree)
    }

    /// The zero element.
    pub fn zero(&self) -> RingElement {
        RingElement { ring: self.clone(), terms: Terms::new() }
    }

    /// The multiplicative unit.
    pub fn one(&self) -> RingElement {
        self.constant(Rational::one())
    }

    /// A constant polynomial.
    pub fn constant(&self, c: Rational) -> RingElement {
        let mut terms = Terms::new();
        add_term(&mut terms, Monomial::one(self.0.vars.len()), c);
        RingElement { ring: self.clone(), terms }
    }

    /// The generator `name` as an element.
    pub fn var(&self, name: &str) -> Result<RingElement> {
        let idx = self.var_index(name)?;
        let mut terms = Terms::new();
        add_term(&mut terms, Monomial::var(self.0.vars.len(), idx), Rational::one());
        Ok(RingElement { ring: self.clone(), terms }.normal_form())
    }

    /// Weight of a monomial under this ring's grading.
    fn monomial_weight(&self, m: &Monomial) -> i64 {
        m.0.iter()
            .zip(&self.0.vars)
            .map(|(&e, v)| e as i64 * v.weight)
            .sum()
    }

    fn truncated(&self, m: &Monomial) -> bool {
        match self.0.truncation {
            Some(w) => self.monomial_weight(m).abs() > w,
            None => false,
        }
    }

    /// Reduce a raw term map to the unique normal form: apply every monic
    /// relation to exhaustion and drop truncated monomials. Terminates
    /// because relations rewrite into strictly earlier variables and lower
    /// powers.
    fn reduce(&self, raw: Terms) -> Terms {
        self.reduce_opt(raw, true)
    }

    /// Reduction with the truncation filter optionally disabled. Relation
    /// rewriting preserves monomial weights, so running untruncated and
    /// filtering once at the end gives the same normal form; intermediate
    /// sums inside one operation must use the untruncated variant, because a
    /// partial product may leave the weight window even when the full
    /// monomial lies inside it.
    fn reduce_opt(&self, raw: Terms, truncate: bool) -> Terms {
        let mut out = Terms::new();
        let mut work: Vec<(Monomial, Rational)> = raw.into_iter().collect();
        while let Some((m, c)) = work.pop() {
            if c.is_zero() || (truncate && self.truncated(&m)) {
                continue;
            }
            // scan from the last variable: relations rewrite towards earlier ones
            let red = (0..m.0.len())
                .rev()
                .find_map(|i| match &self.0.relations[i] {
                    Some(rel) if m.0[i] >= rel.degree => Some((i, rel)),
                    _ => None,
                });
            match red {
                None => add_term(&mut out, m, c),
                Some((i, rel)) => {
                    // m = v^e * rest, v^degree -> rhs
                    let mut rest = m.clone();
                    rest.0[i] -= rel.degree;
                    if rel.rhs.is_empty() {
                        continue; // v^degree = 0
                    }
                    for (rm, rc) in &rel.rhs {
                        work.push((rest.mul(rm), &c * rc));
                    }
                }
            }
        }
        out
    }

    /// Bring an element of a structurally compatible ring (same variable
    /// names, possibly different relations or truncation) into this ring.
    pub fn transport(&self, e: &RingElement) -> Result<RingElement> {
        let mut map = BTreeMap::new();
        for v in &e.ring.0.vars {
            map.insert(v.name.clone(), self.var(&v.name)?);
        }
        e.substitute(&map, self)
    }

    /// Sum over positive-weight variables of `(relation degree - 1) * weight`
    /// — the largest weight a nonzero product of positive-weight generators
    /// can reach under the relations alone. `None` when some positive-weight
    /// variable has no relation.
    pub fn positive_span(&self) -> Option<i64> {
        let mut sum: i64 = 0;
        for (v, rel) in self.0.vars.iter().zip(&self.0.relations) {
            if v.weight > 0 {
                let r = rel.as_ref()?;
                sum += (r.degree as i64 - 1) * v.weight;
            }
        }
        Some(sum)
    }

    /// [`positive_span`] additionally capped by the truncation window.
    /// Truncated series evaluations are exact precisely when the series
    /// degree bound is at least this number, which is how every
    /// `TruncationTooSmall` check in the crate is phrased.
    ///
    /// [`positive_span`]: QuotientRing::positive_span
    pub fn positive_window(&self) -> Option<i64> {
        match (self.positive_span(), self.0.truncation) {
            (Some(s), Some(w)) => Some(s.min(w)),
            (Some(s), None) => Some(s),
            (None, Some(w)) => Some(w),
            (None, None) => None,
        }
    }
}

/// An element of a [`QuotientRing`] in canonical sparse normal form.
///
/// Two elements are equal iff they belong to equal rings and their term maps
/// agree; all constructors normalize, so `==` is semantic equality.
#[derive(Debug, Clone)]
pub struct RingElement {
    ring: QuotientRing,
    terms: Terms,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.terms == other.terms
    }
}

impl Eq for RingElement {}

impl RingElement {
    pub fn ring(&self) -> &QuotientRing {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .all(|(m, c)| m.is_one() && c.is_one())
    }

    /// Number of stored terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Re-reduce. Idempotent: elements are already kept in normal form.
    pub fn normal_form(&self) -> RingElement {
        RingElement {
            ring: self.ring.clone(),
            terms: self.ring.reduce(self.terms.clone()),
        }
    }

    fn check_same_ring(&self, other: &RingElement) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &RingElement) -> Result<RingElement> {
        self.check_same_ring(other)?;
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            add_term(&mut terms, m.clone(), c.clone());
        }
        Ok(RingElement { ring: self.ring.clone(), terms })
    }

    pub fn sub(&self, other: &RingElement) -> Result<RingElement> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> RingElement {
        RingElement {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn scale(&self, q: &Rational) -> RingElement {
        if q.is_zero() {
            return self.ring.zero();
        }
        RingElement {
            ring: self.ring.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * q)).collect(),
        }
    }

    pub fn mul(&self, other: &RingElement) -> Result<RingElement> {
        self.check_same_ring(other)?;
        let mut raw = Terms::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                add_term(&mut raw, m1.mul(m2), c1 * c2);
            }
        }
        Ok(RingElement { ring: self.ring.clone(), terms: self.ring.reduce(raw) })
    }

    pub fn pow(&self, exp: u32) -> Result<RingElement> {
        let mut acc = self.ring.one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// The coefficient of the empty monomial: the image under the ring map
    /// killing every variable.
    pub fn augmentation(&self) -> Rational {
        self.terms
            .iter()
            .find(|(m, _)| m.is_one())
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::zero)
    }

    /// The common weight of all terms. Zero element reports weight 0 (it is
    /// homogeneous of every weight).
    pub fn weight_of(&self) -> Result<i64> {
        let mut weights: Vec<i64> = self
            .terms
            .keys()
            .map(|m| self.ring.monomial_weight(m))
            .collect();
        weights.sort_unstable();
        weights.dedup();
        match weights.len() {
            0 => Ok(0),
            1 => Ok(weights[0]),
            _ => Err(Error::NotHomogeneous(weights)),
        }
    }

    /// Whether the element is zero or homogeneous of weight `w`.
    pub fn is_homogeneous_of(&self, w: i64) -> bool {
        self.is_zero() || self.weight_of() == Ok(w)
    }

    /// The sum of the terms of weight `w`.
    pub fn weight_component(&self, w: i64) -> RingElement {
        RingElement {
            ring: self.ring.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| self.ring.monomial_weight(m) == w)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Apply the ring map sending each variable to its image under `map`,
    /// landing in `target`. Every variable occurring in `self` must have an
    /// image, and the images must live in `target`.
    ///
    /// The result is a ring homomorphism of the quotients only when the map
    /// respects the relations (each `image(v)^d - image(rhs)` vanishes in
    /// the target); the geometric pullbacks in this crate all do.
    ///
    /// All intermediate products run with the truncation filter disabled and
    /// the window is applied once to the final sum: a partial product can
    /// leave the weight window even when the full term lies inside it.
    pub fn substitute(
        &self,
        map: &BTreeMap<String, RingElement>,
        target: &QuotientRing,
    ) -> Result<RingElement> {
        for img in map.values() {
            if img.ring != *target {
                return Err(Error::RingMismatch);
            }
        }
        let nvars = self.ring.0.vars.len();
        let mut images: Vec<Option<&RingElement>> = vec![None; nvars];
        for (i, v) in self.ring.0.vars.iter().enumerate() {
            if self.terms.keys().any(|m| m.0[i] > 0) {
                images[i] = Some(
                    map.get(&v.name)
                        .ok_or_else(|| Error::MissingSubstitution(v.name.clone()))?,
                );
            }
        }
        let mul_nt = |a: &Terms, b: &Terms| -> Terms {
            let mut raw = Terms::new();
            for (m1, c1) in a {
                for (m2, c2) in b {
                    add_term(&mut raw, m1.mul(m2), c1 * c2);
                }
            }
            target.reduce_opt(raw, false)
        };
        // cache untruncated powers of each image
        let mut powers: Vec<BTreeMap<u32, Terms>> = vec![BTreeMap::new(); nvars];
        let mut acc = Terms::new();
        let one_mono = Monomial::one(target.0.vars.len());
        for (m, c) in &self.terms {
            let mut term = Terms::new();
            add_term(&mut term, one_mono.clone(), c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let img = images[i].expect("checked above");
                if let std::collections::btree_map::Entry::Vacant(slot) = powers[i].entry(e) {
                    let mut p = Terms::new();
                    add_term(&mut p, one_mono.clone(), Rational::one());
                    for _ in 0..e {
                        p = mul_nt(&p, &img.terms);
                    }
                    slot.insert(p);
                }
                term = mul_nt(&term, &powers[i][&e]);
            }
            for (tm, tc) in term {
                add_term(&mut acc, tm, tc);
            }
        }
        Ok(RingElement { ring: target.clone(), terms: target.reduce_opt(acc, true) })
    }

    /// Inverse of a unit, by Newton iteration on the nilpotent part.
    /// Terminates because the nilpotent part has finite order; errors with
    /// `NotAUnit` when the augmentation vanishes and `NonTerminating` when
    /// the order cannot be bounded (no nilpotency and no truncation).
    pub fn invert_unit(&self) -> Result<RingElement> {
        let a0 = self.augmentation();
        if a0.is_zero() {
            return Err(Error::NotAUnit);
        }
        let mut u = self.ring.constant(a0.recip());
        // residual r = 1 - self*u squares at every step
        for _ in 0..64 {
            let r = self.ring.one().sub(&self.mul(&u)?)?;
            if r.is_zero() {
                return Ok(u);
            }
            self.nilpotence_guard(&r)?;
            u = u.add(&u.mul(&r)?)?;
        }
        Err(Error::NonTerminating)
    }

    /// Reject residuals that can provably never vanish: a monomial made only
    /// of relation-free variables escapes every relation, and without a
    /// truncation window nothing else can kill it.
    fn nilpotence_guard(&self, r: &RingElement) -> Result<()> {
        if self.ring.0.truncation.is_some() {
            return Ok(());
        }
        for m in r.terms.keys() {
            let escapes = m
                .0
                .iter()
                .enumerate()
                .all(|(i, &e)| e == 0 || self.ring.0.relations[i].is_none());
            if escapes && !m.is_one() {
                return Err(Error::NonTerminating);
            }
        }
        Ok(())
    }

    /// Evaluate the truncated univariate series with coefficient list
    /// `coeffs` (index = power, coefficients in a subring) at `self`.
    /// Exact only when `self^(coeffs.len())` vanishes; errors otherwise.
    pub fn eval_series(&self, coeffs: &[RingElement]) -> Result<RingElement> {
        let ring = &self.ring;
        let mut acc = ring.zero();
        let mut power = ring.one();
        for (k, c) in coeffs.iter().enumerate() {
            if k > 0 {
                power = power.mul(self)?;
                if power.is_zero() {
                    return Ok(acc);
                }
            }
            if !c.is_zero() {
                let c_here = ring.transport(c)?;
                acc = acc.add(&c_here.mul(&power)?)?;
            }
        }
        // the dropped tail must act by zero
        if !power.mul(self)?.is_zero() {
            return Err(Error::NonTerminating);
        }
        Ok(acc)
    }

    /// Smallest `k` with `self^k = 0`, searching up to `cap`.
    pub fn nilpotent_order(&self, cap: u32) -> Option<u32> {
        let mut p = self.ring.one();
        for k in 0..=cap {
            if p.is_zero() {
                return Some(k);
            }
            p = p.mul(self).ok()?;
        }
        None
    }

    /// Iterate over `(variable exponents, coefficient)` pairs in storage order.
    pub fn iter_terms(&self) -> impl Iterator<Item = (&[u32], &Rational)> {
        self.terms.iter().map(|(m, c)| (m.0.as_slice(), c))
    }

    /// Build an element from raw `(exponents, coefficient)` data and reduce.
    pub fn from_raw_terms(
        ring: &QuotientRing,
        terms: impl IntoIterator<Item = (Vec<u32>, Rational)>,
    ) -> Result<RingElement> {
        let nvars = ring.0.vars.len();
        let mut raw = Terms::new();
        for (exps, c) in terms {
            if exps.len() != nvars {
                return Err(Error::Config(format!(
                    "exponent vector of length {} in a ring with {} variables",
                    exps.len(),
                    nvars
                )));
            }
            add_term(&mut raw, Monomial(exps), c);
        }
        Ok(RingElement { ring: ring.clone(), terms: ring.reduce(raw) })
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut parts: Vec<String> = Vec::new();
            if !mag.is_one() || m.is_one() {
                parts.push(format_rational(&mag));
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let name = &self.ring.0.vars[i].name;
                if e == 1 {
                    parts.push(name.clone());
                } else {
                    parts.push(format!("{name}^{e}"));
                }
            }
            write!(f, "{}", parts.join("*"))?;
        }
        Ok(())
    }
}

/// Render a rational without a decimal point: `p` or `p/q`.
pub fn format_rational(q: &Rational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

/// Parse a `p` or `p/q` string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let parse_int = |t: &str| {
        t.parse::<BigInt>()
            .map_err(|_| Error::Config(format!("invalid integer `{t}`")))
    };
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_int(s)?)),
        Some((n, d)) => {
            let den = parse_int(d)?;
            if den.is_zero() {
                return Err(Error::Config("zero denominator".into()));
            }
            Ok(Rational::new(parse_int(n)?, den))
        }
    }
}

// ---------------------------------------------------------------------------
// canonical JSON serialization
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct TermJson {
    coeff: String,
    mono: BTreeMap<String, u32>,
}

#[derive(Serialize, Deserialize)]
struct RelationJson {
    degree: u32,
    rhs: Vec<TermJson>,
}

#[derive(Serialize, Deserialize)]
struct RingJson {
    vars: Vec<Variable>,
    relations: BTreeMap<String, RelationJson>,
    truncation: Option<i64>,
}

impl QuotientRing {
    fn terms_to_json(&self, terms: &Terms) -> Vec<TermJson> {
        terms
            .iter()
            .map(|(m, c)| TermJson {
                coeff: format_rational(c),
                mono: m
                    .0
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (self.0.vars[i].name.clone(), e))
                    .collect(),
            })
            .collect()
    }

    fn terms_from_json(&self, terms: &[TermJson]) -> Result<Terms> {
        let mut raw = Terms::new();
        for t in terms {
            let mut exps = vec![0u32; self.0.vars.len()];
            for (name, &e) in &t.mono {
                exps[self.var_index(name)?] = e;
            }
            add_term(&mut raw, Monomial(exps), parse_rational(&t.coeff)?);
        }
        Ok(self.reduce(raw))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let relations = self
            .0
            .vars
            .iter()
            .zip(&self.0.relations)
            .filter_map(|(v, rel)| {
                rel.as_ref().map(|r| {
                    (
                        v.name.clone(),
                        RelationJson { degree: r.degree, rhs: self.terms_to_json(&r.rhs) },
                    )
                })
            })
            .collect();
        serde_json::to_value(RingJson {
            vars: self.0.vars.clone(),
            relations,
            truncation: self.0.truncation,
        })
        .expect("ring serialization cannot fail")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let json: RingJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::Config(format!("bad ring json: {e}")))?;
        // nilpotencies in `vars` and entries in `relations` may overlap only
        // if they agree
        let mut vars = json.vars.clone();
        for v in &mut vars {
            if let Some(rel) = json.relations.get(&v.name) {
                if rel.rhs.is_empty() {
                    v.nilpotency = Some(rel.degree);
                }
            }
        }
        let mut ring = Self::new(vars, json.truncation)?;
        for (name, rel) in &json.relations {
            if rel.rhs.is_empty() {
                continue; // already installed as nilpotency
            }
            let plain = ring.clone();
            let rhs = RingElement {
                ring: plain.clone(),
                terms: plain.terms_from_json(&rel.rhs)?,
            };
            ring = ring.with_monic_relation(name, rel.degree, &rhs)?;
        }
        Ok(ring)
    }
}

impl RingElement {
    /// Canonical JSON: an array of `{"coeff", "mono"}` records in storage
    /// order. Bit-exact across runs.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.ring.terms_to_json(&self.terms))
            .expect("element serialization cannot fail")
    }

    pub fn from_json(ring: &QuotientRing, value: &serde_json::Value) -> Result<Self> {
        let terms: Vec<TermJson> = serde_json::from_value(value.clone())
            .map_err(|e| Error::Config(format!("bad element json: {e}")))?;
        Ok(RingElement { ring: ring.clone(), terms: ring.terms_from_json(&terms)? })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q_c_nilp(k: u32) -> QuotientRing {
        QuotientRing::new(vec![Variable::nilpotent("c", 1, k)], None).unwrap()
    }

    #[test]
    fn nilpotency_truncates_powers() {
        let r = q_c_nilp(3);
        let c = r.var("c").unwrap();
        assert!(c.pow(3).unwrap().is_zero());
        assert!(!c.pow(2).unwrap().is_zero());
    }

    #[test]
    fn monic_relation_single_rewrite() {
        // Q[x1,x2][xi] / (xi^2 = (x1+x2) xi - x1 x2)
        let base = QuotientRing::new(
            vec![
                Variable::new("x1", 1),
                Variable::new("x2", 1),
                Variable::new("xi", 1),
            ],
            None,
        )
        .unwrap();
        let x1 = base.var("x1").unwrap();
        let x2 = base.var("x2").unwrap();
        let xi = base.var("xi").unwrap();
        let rhs = x1.add(&x2).unwrap().mul(&xi).unwrap().sub(&x1.mul(&x2).unwrap()).unwrap();
        let ring = base.with_monic_relation("xi", 2, &rhs).unwrap();

        let xi = ring.var("xi").unwrap();
        let x1 = ring.var("x1").unwrap();
        let x2 = ring.var("x2").unwrap();
        let e1 = x1.add(&x2).unwrap();
        let e2 = x1.mul(&x2).unwrap();

        let expect2 = e1.mul(&xi).unwrap().sub(&e2).unwrap();
        assert_eq!(xi.pow(2).unwrap(), expect2);

        // xi^3 = (e1^2 - e2) xi - e1 e2, by repeated reduction
        let expect3 = e1
            .pow(2)
            .unwrap()
            .sub(&e2)
            .unwrap()
            .mul(&xi)
            .unwrap()
            .sub(&e1.mul(&e2).unwrap())
            .unwrap();
        assert_eq!(xi.pow(3).unwrap(), expect3);
    }

    #[test]
    fn product_of_unit_pair() {
        // (1+c)(1-c) = 1 in Q[c]/(c^2)
        let r = q_c_nilp(2);
        let c = r.var("c").unwrap();
        let p = r.one().add(&c).unwrap().mul(&r.one().sub(&c).unwrap()).unwrap();
        assert!(p.is_one());
    }

    #[test]
    fn binomial_square() {
        let r = QuotientRing::new(
            vec![Variable::nilpotent("c", 1, 3), Variable::nilpotent("d", 1, 3)],
            None,
        )
        .unwrap();
        let c = r.var("c").unwrap();
        let d = r.var("d").unwrap();
        let sq = c.add(&d).unwrap().pow(2).unwrap();
        let expect = c
            .pow(2)
            .unwrap()
            .add(&c.mul(&d).unwrap().scale(&rat(2)))
            .unwrap()
            .add(&d.pow(2).unwrap())
            .unwrap();
        assert_eq!(sq, expect);
    }

    #[test]
    fn weights() {
        let r = QuotientRing::new(
            vec![Variable::new("a", -1), Variable::nilpotent("c", 1, 4)],
            None,
        )
        .unwrap();
        let a = r.var("a").unwrap();
        let c = r.var("c").unwrap();
        assert_eq!(c.pow(2).unwrap().weight_of(), Ok(2));
        assert_eq!(a.mul(&c.pow(2).unwrap()).unwrap().weight_of(), Ok(1));
        let mixed = c.add(&c.pow(2).unwrap()).unwrap();
        assert_eq!(mixed.weight_of(), Err(Error::NotHomogeneous(vec![1, 2])));
        assert_eq!(r.zero().weight_of(), Ok(0));
    }

    #[test]
    fn substitution_examples() {
        let from = q_c_nilp(4);
        let to = q_c_nilp(3);
        let c4 = from.var("c").unwrap();
        let mut map = BTreeMap::new();
        map.insert("c".to_string(), to.var("c").unwrap());
        assert_eq!(
            c4.pow(2).unwrap().substitute(&map, &to).unwrap(),
            to.var("c").unwrap().pow(2).unwrap()
        );
        assert!(c4.pow(3).unwrap().substitute(&map, &to).unwrap().is_zero());

        // cd with c -> x+y, d -> x
        let cd_ring = QuotientRing::new(
            vec![Variable::new("c", 1), Variable::new("d", 1)],
            None,
        )
        .unwrap();
        let target = QuotientRing::new(
            vec![Variable::new("x", 1), Variable::new("y", 1)],
            None,
        )
        .unwrap();
        let cd = cd_ring.var("c").unwrap().mul(&cd_ring.var("d").unwrap()).unwrap();
        let x = target.var("x").unwrap();
        let y = target.var("y").unwrap();
        let mut map = BTreeMap::new();
        map.insert("c".to_string(), x.add(&y).unwrap());
        map.insert("d".to_string(), x.clone());
        let image = cd.substitute(&map, &target).unwrap();
        let expect = x.pow(2).unwrap().add(&x.mul(&y).unwrap()).unwrap();
        assert_eq!(image, expect);
    }

    #[test]
    fn substitution_requires_images() {
        let r = q_c_nilp(3);
        let c = r.var("c").unwrap();
        let map = BTreeMap::new();
        assert_eq!(
            c.substitute(&map, &r),
            Err(Error::MissingSubstitution("c".into()))
        );
    }

    #[test]
    fn invert_unit_examples() {
        let r = q_c_nilp(3);
        let c = r.var("c").unwrap();
        let u = r.one().add(&c).unwrap().invert_unit().unwrap();
        // 1 - c + c^2
        let expect = r.one().sub(&c).unwrap().add(&c.pow(2).unwrap()).unwrap();
        assert_eq!(u, expect);

        let two = q_c_nilp(2).constant(rat(2));
        assert_eq!(two.invert_unit().unwrap().augmentation(), ratio(1, 2));

        let r2 = QuotientRing::new(
            vec![Variable::nilpotent("c", 1, 2), Variable::nilpotent("d", 1, 2)],
            None,
        )
        .unwrap();
        let c = r2.var("c").unwrap();
        let d = r2.var("d").unwrap();
        let e = r2.one().add(&c).unwrap().add(&d).unwrap();
        let inv = e.invert_unit().unwrap();
        let expect = r2
            .one()
            .sub(&c)
            .unwrap()
            .sub(&d)
            .unwrap()
            .add(&c.mul(&d).unwrap().scale(&rat(2)))
            .unwrap();
        assert_eq!(inv, expect);
        assert!(e.mul(&inv).unwrap().is_one());
    }

    #[test]
    fn invert_non_unit_fails() {
        let r = q_c_nilp(3);
        assert_eq!(r.var("c").unwrap().invert_unit(), Err(Error::NotAUnit));
        // 1 + b over Q[b] with no relation and no truncation cannot terminate
        let rb = QuotientRing::new(vec![Variable::new("b", -1)], None).unwrap();
        let e = rb.one().add(&rb.var("b").unwrap()).unwrap();
        assert_eq!(e.invert_unit(), Err(Error::NonTerminating));
        // with truncation it works
        let rb = QuotientRing::new(vec![Variable::new("b", -1)], Some(3)).unwrap();
        let b = rb.var("b").unwrap();
        let inv = rb.one().add(&b).unwrap().invert_unit().unwrap();
        assert!(rb.one().add(&b).unwrap().mul(&inv).unwrap().is_one());
    }

    #[test]
    fn augmentation_examples() {
        let r = q_c_nilp(3);
        let c = r.var("c").unwrap();
        assert_eq!(r.constant(rat(3)).add(&c).unwrap().augmentation(), rat(3));
        assert_eq!(c.pow(2).unwrap().augmentation(), rat(0));
    }

    #[test]
    fn eval_series_examples() {
        let r = q_c_nilp(3);
        let c = r.var("c").unwrap();
        let q = QuotientRing::rationals();
        // s = (0,1,1,1,...): c + c^2
        let s: Vec<_> = [0, 1, 1, 1, 1].iter().map(|&n| q.constant(rat(n))).collect();
        assert_eq!(
            c.eval_series(&s).unwrap(),
            c.add(&c.pow(2).unwrap()).unwrap()
        );
        // exp-like (0,1,1/2): c + c^2/2
        let s = vec![q.zero(), q.one(), q.constant(ratio(1, 2))];
        assert_eq!(
            c.eval_series(&s).unwrap(),
            c.add(&c.pow(2).unwrap().scale(&ratio(1, 2))).unwrap()
        );
    }

    #[test]
    fn eval_series_rejects_non_nilpotent() {
        let r = QuotientRing::new(vec![Variable::new("c", 1)], None).unwrap();
        let c = r.var("c").unwrap();
        let q = QuotientRing::rationals();
        let s = vec![q.zero(), q.one(), q.one()];
        assert_eq!(c.eval_series(&s), Err(Error::NonTerminating));
    }

    #[test]
    fn truncation_drops_heavy_terms() {
        let r = QuotientRing::new(
            vec![Variable::new("b", -1), Variable::nilpotent("c", 1, 9)],
            Some(2),
        )
        .unwrap();
        let b = r.var("b").unwrap();
        assert!(b.pow(3).unwrap().is_zero());
        let c = r.var("c").unwrap();
        assert!(c.pow(3).unwrap().is_zero()); // weight 3 > 2
        assert!(!b.pow(2).unwrap().mul(&c.pow(2).unwrap()).unwrap().is_zero());
    }

    #[test]
    fn positive_window() {
        let r = QuotientRing::new(
            vec![
                Variable::new("b", -1),
                Variable::nilpotent("c", 1, 3),
                Variable::nilpotent("d", 1, 4),
            ],
            None,
        )
        .unwrap();
        assert_eq!(r.positive_window(), Some(2 + 3));
        let free = QuotientRing::new(vec![Variable::new("c", 1)], None).unwrap();
        assert_eq!(free.positive_window(), None);
        let trunc = free.with_truncation(Some(5)).unwrap();
        assert_eq!(trunc.positive_window(), Some(5));
    }

    #[test]
    fn values_are_shareable_across_threads() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<QuotientRing>();
        assert_send_sync::<RingElement>();
        // immutability in practice: concurrent readers of one element
        let r = q_c_nilp(4);
        let e = r.one().add(&r.var("c").unwrap()).unwrap();
        std::thread::scope(|s| {
            for _ in 0..4 {
                s.spawn(|| assert!(e.pow(3).unwrap().num_terms() > 0));
            }
        });
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(QuotientRing::new(
            vec![Variable::new("c", 1), Variable::new("c", 2)],
            None
        )
        .is_err());
        assert!(QuotientRing::new(vec![], Some(-1)).is_err());

        // monic relations must be triangular
        let r = QuotientRing::new(
            vec![Variable::new("x", 1), Variable::new("y", 1)],
            None,
        )
        .unwrap();
        let y = r.var("y").unwrap();
        // x^2 = y mentions a later variable
        assert!(r.with_monic_relation("x", 2, &y).is_err());
        // y^2 = y^3-ish degree violation
        let y3 = y.pow(3).unwrap();
        assert!(r.with_monic_relation("y", 2, &y3).is_err());
        // relations must preserve weights
        let x = r.var("x").unwrap();
        assert!(r.with_monic_relation("y", 2, &x).is_err());
        // a valid relation, then a duplicate
        let x2 = x.pow(2).unwrap();
        let ring = r.with_monic_relation("y", 2, &x2).unwrap();
        let x3 = ring.var("x").unwrap().pow(3).unwrap();
        assert!(ring.with_monic_relation("y", 3, &x3).is_err());
    }

    #[test]
    fn relation_ring_json_round_trip() {
        // a completion-style ring: xi^2 = nu xi over Q[nu]/(nu^3)
        let base = QuotientRing::new(
            vec![Variable::nilpotent("nu", 1, 3), Variable::new("xi", 1)],
            None,
        )
        .unwrap();
        let nu = base.var("nu").unwrap();
        let xi = base.var("xi").unwrap();
        let ring = base
            .with_monic_relation("xi", 2, &nu.mul(&xi).unwrap())
            .unwrap();
        let ring2 = QuotientRing::from_json(&ring.to_json()).unwrap();
        assert_eq!(ring, ring2);
        let xi2 = ring2.var("xi").unwrap().pow(2).unwrap();
        assert_eq!(
            xi2,
            ring2.var("nu").unwrap().mul(&ring2.var("xi").unwrap()).unwrap()
        );
    }

    #[test]
    fn json_round_trip_is_canonical() {
        let base = QuotientRing::new(
            vec![
                Variable::new("x1", 1),
                Variable::nilpotent("xi", 1, 5),
            ],
            Some(7),
        )
        .unwrap();
        let x1 = base.var("x1").unwrap();
        let xi = base.var("xi").unwrap();
        let e = x1
            .mul(&xi)
            .unwrap()
            .scale(&ratio(-3, 2))
            .add(&base.one())
            .unwrap();
        let ring_json = base.to_json();
        let ring2 = QuotientRing::from_json(&ring_json).unwrap();
        assert_eq!(base, ring2);
        let elem_json = e.to_json();
        let e2 = RingElement::from_json(&ring2, &elem_json).unwrap();
        assert_eq!(e, e2);
        // byte-deterministic
        assert_eq!(
            serde_json::to_string(&elem_json).unwrap(),
            serde_json::to_string(&e2.to_json()).unwrap()
        );
    }

    #[test]
    fn display_graded_lex() {
        let r = QuotientRing::new(
            vec![Variable::nilpotent("c", 1, 4), Variable::nilpotent("d", 1, 4)],
            None,
        )
        .unwrap();
        let c = r.var("c").unwrap();
        let d = r.var("d").unwrap();
        let e = d
            .pow(2)
            .unwrap()
            .add(&c.mul(&d).unwrap().scale(&rat(-2)))
            .unwrap()
            .add(&r.one())
            .unwrap();
        assert_eq!(e.to_string(), "1 - 2*c*d + d^2");
    }
}
