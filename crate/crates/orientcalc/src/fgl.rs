//! One-dimensional commutative formal group laws over a coefficient ring.
//!
//! A law is stored as its truncated coefficient table `a_{ij}` with
//! `1 <= i+j <= D`. The built-in families are the additive law `x + y`, the
//! universal multiplicative law `x + y + beta*x*y`, and the generic law
//! parametrized by its logarithm `log(x) = x + b_1 x^2 + ...` over
//! `Q[b_1, ..., b_{D-1}]` — over the rationals every law is
//! log-parametrizable, and the log form satisfies the axioms identically
//! while keeping the `a_{ij}` fully symbolic as polynomials in the `b_i`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ring::{QuotientRing, RingElement, Variable};

/// A truncated univariate power series with coefficients in a ring `A`;
/// `coeffs[k]` is the coefficient of `x^k` and the length is the degree
/// bound plus one.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivariateSeries {
    pub coeff_ring: QuotientRing,
    pub coeffs: Vec<RingElement>,
}

impl UnivariateSeries {
    pub fn zero(ring: &QuotientRing, bound: u32) -> Self {
        UnivariateSeries {
            coeff_ring: ring.clone(),
            coeffs: vec![ring.zero(); bound as usize + 1],
        }
    }

    /// The identity series `x`.
    pub fn identity(ring: &QuotientRing, bound: u32) -> Self {
        let mut s = Self::zero(ring, bound);
        s.coeffs[1] = ring.one();
        s
    }

    pub fn bound(&self) -> u32 {
        self.coeffs.len() as u32 - 1
    }

    pub fn get(&self, k: usize) -> RingElement {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| self.coeff_ring.zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (k, c) in other.coeffs.iter().enumerate() {
            if k < out.coeffs.len() {
                out.coeffs[k] = out.coeffs[k].add(c)?;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (k, c) in other.coeffs.iter().enumerate() {
            if k < out.coeffs.len() {
                out.coeffs[k] = out.coeffs[k].sub(c)?;
            }
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let bound = self.bound().min(other.bound());
        let mut out = Self::zero(&self.coeff_ring, bound);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if i + j > bound as usize {
                    break;
                }
                if b.is_zero() {
                    continue;
                }
                out.coeffs[i + j] = out.coeffs[i + j].add(&a.mul(b)?)?;
            }
        }
        Ok(out)
    }

    pub fn scale_elem(&self, c: &RingElement) -> Result<Self> {
        let mut out = self.clone();
        for k in &mut out.coeffs {
            *k = k.mul(c)?;
        }
        Ok(out)
    }

    /// Substitute `other` (which must have zero constant term) into `self`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if !other.get(0).is_zero() {
            return Err(Error::Config(
                "series composition needs a zero constant term".into(),
            ));
        }
        let bound = self.bound().min(other.bound());
        let mut out = Self::zero(&self.coeff_ring, bound);
        out.coeffs[0] = self.get(0);
        // Horner: (((s_D * g + s_{D-1}) * g + ...) * g + s_1) * g
        let mut acc = Self::zero(&self.coeff_ring, bound);
        for k in (1..=bound as usize).rev() {
            acc.coeffs[0] = acc.coeffs[0].add(&self.get(k))?;
            acc = acc.mul(other)?;
        }
        out.add(&acc)
    }

    /// Multiplicative inverse; the constant term must be a unit of `A`.
    pub fn reciprocal(&self) -> Result<Self> {
        let inv0 = self.get(0).invert_unit()?;
        let bound = self.bound();
        let mut out = Self::zero(&self.coeff_ring, bound);
        out.coeffs[0] = inv0.clone();
        for k in 1..=bound as usize {
            // sum_{j<k} out_j * self_{k-j} + out_k * self_0 = 0
            let mut s = self.coeff_ring.zero();
            for j in 0..k {
                s = s.add(&out.coeffs[j].mul(&self.get(k - j))?)?;
            }
            out.coeffs[k] = s.neg().mul(&inv0)?;
        }
        Ok(out)
    }

    /// Compositional inverse of a series `x + O(x^2)`.
    pub fn compositional_inverse(&self) -> Result<Self> {
        if !self.get(0).is_zero() || !self.get(1).is_one() {
            return Err(Error::Config(
                "compositional inverse needs the form x + O(x^2)".into(),
            ));
        }
        let bound = self.bound();
        let mut inv = Self::identity(&self.coeff_ring, bound);
        for k in 2..=bound as usize {
            // fix up coefficient k: (inv o self)_k is linear in inv_k with
            // unit coefficient 1
            let g = inv.compose(self)?;
            inv.coeffs[k] = inv.coeffs[k].sub(&g.get(k))?;
        }
        Ok(inv)
    }

    /// True when `coeffs[k]` is homogeneous of weight `target - k` for all
    /// `k`, i.e. the series maps weight-1 elements to weight-`target` ones.
    pub fn is_weight_homogeneous(&self, target: i64) -> bool {
        self.coeffs
            .iter()
            .enumerate()
            .all(|(k, c)| c.is_homogeneous_of(target - k as i64))
    }
}

impl std::fmt::Display for UnivariateSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts = Vec::new();
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let xs = match k {
                0 => String::new(),
                1 => "x".to_string(),
                _ => format!("x^{k}"),
            };
            let cs = c.to_string();
            let needs_parens = c.num_terms() > 1;
            let is_minus_one = c.neg().is_one();
            let body = match (needs_parens, xs.is_empty(), c.is_one()) {
                (_, true, _) => cs,
                (true, false, _) => format!("({cs})*{xs}"),
                (false, false, true) => xs,
                (false, false, false) if is_minus_one => format!("-{xs}"),
                (false, false, false) => format!("{cs}*{xs}"),
            };
            parts.push(body);
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + ").replace("+ -", "- "))
        }
    }
}

/// Sparse polynomial in `N` formal variables, truncated at a total degree
/// bound, with coefficients in `A`. Internal engine for axiom checks and
/// series composition.
#[derive(Debug, Clone)]
struct MultiPoly<const N: usize> {
    ring: QuotientRing,
    bound: u32,
    terms: BTreeMap<[u32; N], RingElement>,
}

impl<const N: usize> MultiPoly<N> {
    fn zero(ring: &QuotientRing, bound: u32) -> Self {
        MultiPoly { ring: ring.clone(), bound, terms: BTreeMap::new() }
    }

    fn add_term(&mut self, exps: [u32; N], c: RingElement) -> Result<()> {
        if c.is_zero() || exps.iter().sum::<u32>() > self.bound {
            return Ok(());
        }
        let entry = self.terms.entry(exps).or_insert_with(|| self.ring.zero());
        *entry = entry.add(&c)?;
        if entry.is_zero() {
            self.terms.remove(&exps);
        }
        Ok(())
    }

    fn add(&self, other: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone())?;
        }
        Ok(out)
    }

    fn mul(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero(&self.ring, self.bound);
        for (e1, c1) in &self.terms {
            let d1: u32 = e1.iter().sum();
            for (e2, c2) in &other.terms {
                let d2: u32 = e2.iter().sum();
                if d1 + d2 > self.bound {
                    continue;
                }
                let mut e = *e1;
                for (a, b) in e.iter_mut().zip(e2.iter()) {
                    *a += b;
                }
                out.add_term(e, c1.mul(c2)?)?;
            }
        }
        Ok(out)
    }

    fn scale(&self, c: &RingElement) -> Result<Self> {
        let mut out = Self::zero(&self.ring, self.bound);
        for (e, t) in &self.terms {
            out.add_term(*e, t.mul(c)?)?;
        }
        Ok(out)
    }
}

/// The FGL config file schema; the CLI loads laws exclusively through it.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum FglConfig {
    Additive {
        #[serde(rename = "D")]
        d: u32,
    },
    Multiplicative {
        #[serde(rename = "D")]
        d: u32,
    },
    Log {
        #[serde(rename = "D")]
        d: u32,
        /// Rational values for the log coefficients; `null` entries stay
        /// symbolic. An empty list means all symbolic (the generic law).
        #[serde(default)]
        log_coeffs: Vec<Option<String>>,
    },
    Explicit {
        #[serde(rename = "D")]
        d: u32,
        /// The coefficient ring of the table, defaulting to the rationals.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        coeff_ring: Option<serde_json::Value>,
        /// Map `"i,j"` -> element json.
        explicit_coeffs: BTreeMap<String, serde_json::Value>,
    },
}

/// A commutative one-dimensional formal group law, truncated at total degree
/// `D`, with coefficients in a ring `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalGroupLaw {
    coeff_ring: QuotientRing,
    degree_bound: u32,
    coeffs: BTreeMap<(u32, u32), RingElement>,
    /// When set, the stored table is the complete law (all higher
    /// coefficients vanish), so no degree guard is ever needed.
    exact: bool,
}

impl FormalGroupLaw {
    /// The additive law `F(x, y) = x + y` over the rationals.
    pub fn additive(d: u32) -> Self {
        let q = QuotientRing::rationals();
        let mut coeffs = BTreeMap::new();
        coeffs.insert((1, 0), q.one());
        coeffs.insert((0, 1), q.one());
        FormalGroupLaw { coeff_ring: q, degree_bound: d.max(1), coeffs, exact: true }
    }

    /// The universal multiplicative law `F(x, y) = x + y + beta*x*y` over
    /// `Q[beta]`, `beta` of weight -1.
    pub fn multiplicative(d: u32) -> Self {
        let a = QuotientRing::new(vec![Variable::new("beta", -1)], None)
            .expect("valid ring");
        let beta = a.var("beta").expect("declared");
        let mut coeffs = BTreeMap::new();
        coeffs.insert((1, 0), a.one());
        coeffs.insert((0, 1), a.one());
        coeffs.insert((1, 1), beta);
        FormalGroupLaw { coeff_ring: a, degree_bound: d.max(2), coeffs, exact: true }
    }

    /// The generic law of degree bound `d`: log coefficients are free
    /// symbols `b1, ..., b_{d-1}` over `Q[b*]` truncated at weight `d`.
    pub fn generic(d: u32) -> Result<Self> {
        let d = d.max(2);
        let vars: Vec<Variable> = (1..d)
            .map(|i| Variable::new(format!("b{i}"), -(i as i64)))
            .collect();
        let a = QuotientRing::new(vars, Some(d as i64))?;
        let bs: Vec<RingElement> = (1..d)
            .map(|i| a.var(&format!("b{i}")))
            .collect::<Result<_>>()?;
        Self::from_log(&a, &bs, d)
    }

    /// Build a law from its logarithm `log(x) = x + sum b_i x^(i+1)`:
    /// `F(x, y) = exp(log x + log y)` truncated at total degree `d`, where
    /// `exp` is the compositional inverse of `log`. Satisfies the axioms by
    /// construction.
    pub fn from_log(ring: &QuotientRing, b: &[RingElement], d: u32) -> Result<Self> {
        let d = d.max(1);
        if (b.len() as u32) < d.saturating_sub(1) {
            return Err(Error::InsufficientLogCoefficients {
                needed: d as usize - 1,
                got: b.len(),
            });
        }
        let mut log = UnivariateSeries::identity(ring, d);
        for (i, bi) in b.iter().take(d as usize - 1).enumerate() {
            if bi.ring() != ring {
                return Err(Error::RingMismatch);
            }
            log.coeffs[i + 2] = bi.clone();
        }
        let exp = log.compositional_inverse()?;

        // u = log(x) + log(y) as a bivariate polynomial, then F = exp(u)
        let mut u = MultiPoly::<2>::zero(ring, d);
        for (k, c) in log.coeffs.iter().enumerate() {
            u.add_term([k as u32, 0], c.clone())?;
            u.add_term([0, k as u32], c.clone())?;
        }
        let mut f = MultiPoly::<2>::zero(ring, d);
        let mut u_pow = MultiPoly::<2>::zero(ring, d);
        u_pow.add_term([0, 0], ring.one())?;
        for k in 0..=d as usize {
            if k > 0 {
                u_pow = u_pow.mul(&u)?;
            }
            f = f.add(&u_pow.scale(&exp.get(k))?)?;
        }

        let mut coeffs = BTreeMap::new();
        for (e, c) in f.terms {
            if e[0] + e[1] >= 1 {
                coeffs.insert((e[0], e[1]), c);
            }
        }
        let fgl = FormalGroupLaw {
            coeff_ring: ring.clone(),
            degree_bound: d,
            coeffs,
            exact: false,
        };
        fgl.validate()?;
        Ok(fgl)
    }

    /// Build a law from an explicit coefficient table. The table is taken as
    /// the complete law (omitted coefficients are zero); the structural
    /// invariants are checked here, the full axioms via [`check_axioms`].
    ///
    /// [`check_axioms`]: FormalGroupLaw::check_axioms
    pub fn explicit(
        ring: &QuotientRing,
        table: BTreeMap<(u32, u32), RingElement>,
        d: u32,
    ) -> Result<Self> {
        let mut coeffs = BTreeMap::new();
        for ((i, j), c) in table {
            if c.ring() != ring {
                return Err(Error::RingMismatch);
            }
            if i + j >= 1 && !c.is_zero() {
                coeffs.insert((i, j), c);
            }
        }
        let fgl = FormalGroupLaw {
            coeff_ring: ring.clone(),
            degree_bound: d.max(1),
            coeffs,
            exact: true,
        };
        fgl.validate()?;
        Ok(fgl)
    }

    pub fn from_config(config: &FglConfig) -> Result<Self> {
        match config {
            FglConfig::Additive { d } => Ok(Self::additive(*d)),
            FglConfig::Multiplicative { d } => Ok(Self::multiplicative(*d)),
            FglConfig::Log { d, log_coeffs } => {
                let d = (*d).max(2);
                if log_coeffs.is_empty() {
                    return Self::generic(d);
                }
                // numeric entries become rational constants, null entries
                // stay symbolic
                let vars: Vec<Variable> = (1..d)
                    .filter(|i| {
                        log_coeffs
                            .get(*i as usize - 1)
                            .is_none_or(|v| v.is_none())
                    })
                    .map(|i| Variable::new(format!("b{i}"), -(i as i64)))
                    .collect();
                let a = QuotientRing::new(vars, Some(d as i64))?;
                let bs: Vec<RingElement> = (1..d)
                    .map(|i| match log_coeffs.get(i as usize - 1) {
                        Some(Some(s)) => Ok(a.constant(crate::ring::parse_rational(s)?)),
                        _ => a.var(&format!("b{i}")),
                    })
                    .collect::<Result<_>>()?;
                Self::from_log(&a, &bs, d)
            }
            FglConfig::Explicit { d, coeff_ring, explicit_coeffs } => {
                let ring = match coeff_ring {
                    Some(v) => QuotientRing::from_json(v)?,
                    None => QuotientRing::rationals(),
                };
                let mut table = BTreeMap::new();
                for (key, val) in explicit_coeffs {
                    let (i, j) = key
                        .split_once(',')
                        .ok_or_else(|| Error::Config(format!("bad index `{key}`")))?;
                    let parse = |t: &str| {
                        t.trim()
                            .parse::<u32>()
                            .map_err(|_| Error::Config(format!("bad index `{key}`")))
                    };
                    table.insert(
                        (parse(i)?, parse(j)?),
                        RingElement::from_json(&ring, val)?,
                    );
                }
                Self::explicit(&ring, table, *d)
            }
        }
    }

    /// Structural invariants: unit coefficients, vanishing `a_{0,j}`,
    /// symmetry.
    fn validate(&self) -> Result<()> {
        if !self.coeff(1, 0)?.is_one() || !self.coeff(0, 1)?.is_one() {
            return Err(Error::Config("a_{1,0} and a_{0,1} must be 1".into()));
        }
        for (&(i, j), c) in &self.coeffs {
            if i == 0 && j != 1 && !c.is_zero() {
                return Err(Error::Config(format!("a_{{0,{j}}} must vanish")));
            }
            if *c != self.coeff(j, i)? {
                return Err(Error::Config(format!("a_{{{i},{j}}} breaks symmetry")));
            }
        }
        Ok(())
    }

    /// Whether every `a_{ij}` is homogeneous of weight `-(i+j-1)`. Holds for
    /// the symbolic presets; instantiating log coefficients at rational
    /// numbers collapses the grading and clears this.
    pub fn is_graded(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(&(i, j), c)| c.is_homogeneous_of(1 - (i + j) as i64))
    }

    pub fn coeff_ring(&self) -> &QuotientRing {
        &self.coeff_ring
    }

    pub fn degree_bound(&self) -> u32 {
        self.degree_bound
    }

    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// The coefficient `a_{ij}`. Beyond the degree bound this is zero for an
    /// exact law and an error for a truncated one.
    pub fn coeff(&self, i: u32, j: u32) -> Result<RingElement> {
        if i + j > self.degree_bound && !self.exact {
            return Err(Error::TruncationTooSmall {
                needed: (i + j) as i64,
                have: self.degree_bound as i64,
            });
        }
        Ok(self
            .coeffs
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(|| self.coeff_ring.zero()))
    }

    /// Guard a computation that needs the law exactly up to degree `needed`.
    pub fn require_degree(&self, needed: i64) -> Result<()> {
        if self.exact || needed <= self.degree_bound as i64 {
            Ok(())
        } else {
            Err(Error::TruncationTooSmall { needed, have: self.degree_bound as i64 })
        }
    }

    /// Expand the unit, commutativity and associativity defects in truncated
    /// series up to the degree bound; returns every nonzero coefficient
    /// found (empty means the axioms hold).
    pub fn check_axioms(&self) -> Result<Vec<RingElement>> {
        let d = self.degree_bound;
        let ring = &self.coeff_ring;
        let mut violations = Vec::new();

        // F(x, 0) = x
        for ((i, j), c) in &self.coeffs {
            if *j == 0 {
                let defect = if *i == 1 { c.sub(&ring.one())? } else { c.clone() };
                if !defect.is_zero() {
                    violations.push(defect);
                }
            }
        }

        // F(x, y) = F(y, x)
        for (&(i, j), c) in &self.coeffs {
            if i < j {
                let defect = c.sub(&self.coeff(j, i)?)?;
                if !defect.is_zero() {
                    violations.push(defect);
                }
            }
        }

        // F(F(x,y),z) = F(x,F(y,z)) in three truncated variables
        let mut u = MultiPoly::<3>::zero(ring, d); // F(x,y)
        let mut w = MultiPoly::<3>::zero(ring, d); // F(y,z)
        for (&(i, j), c) in &self.coeffs {
            u.add_term([i, j, 0], c.clone())?;
            w.add_term([0, i, j], c.clone())?;
        }
        let lhs = self.compose_tri(&u, 0)?; // F(u, z): second slot is the bare var z
        let rhs = self.compose_tri(&w, 1)?; // F(x, w): first slot is the bare var x
        let mut defect = lhs;
        for (e, c) in rhs.terms {
            defect.add_term(e, c.neg())?;
        }
        violations.extend(defect.terms.into_values());
        Ok(violations)
    }

    /// `F(p, z)` (mode 0) or `F(x, p)` (mode 1) where the other argument is
    /// a bare variable of the trivariate window.
    fn compose_tri(&self, p: &MultiPoly<3>, mode: u8) -> Result<MultiPoly<3>> {
        let d = self.degree_bound;
        let ring = &self.coeff_ring;
        let mut pows: Vec<MultiPoly<3>> = Vec::with_capacity(d as usize + 1);
        let mut unit = MultiPoly::<3>::zero(ring, d);
        unit.add_term([0, 0, 0], ring.one())?;
        pows.push(unit);
        for k in 1..=d as usize {
            pows.push(pows[k - 1].mul(p)?);
        }
        let mut out = MultiPoly::<3>::zero(ring, d);
        for (&(i, j), c) in &self.coeffs {
            // mode 0: p^i * z^j ; mode 1: x^i * p^j
            let (ppow, bare, bare_exp) = match mode {
                0 => (i, 2usize, j),
                _ => (j, 0usize, i),
            };
            for (e, pc) in &pows[ppow as usize].terms {
                let mut exps = *e;
                exps[bare] += bare_exp;
                out.add_term(exps, pc.mul(c)?)?;
            }
        }
        Ok(out)
    }

    /// The formal inverse: the unique series `m(x) = -x + O(x^2)` with
    /// `F(x, m(x)) = 0` up to the degree bound, solved degree by degree.
    pub fn formal_inverse(&self) -> Result<UnivariateSeries> {
        let d = self.degree_bound;
        let mut m = UnivariateSeries::zero(&self.coeff_ring, d);
        m.coeffs[1] = self.coeff_ring.one().neg();
        for k in 2..=d as usize {
            // the x^k coefficient of F(x, m(x)) is linear in m_k with unit
            // coefficient a_{0,1} = 1
            let g = self.apply_to_series(
                &UnivariateSeries::identity(&self.coeff_ring, d),
                &m,
            )?;
            m.coeffs[k] = m.coeffs[k].sub(&g.get(k))?;
        }
        Ok(m)
    }

    /// `F(u(x), v(x))` as a truncated univariate series.
    pub fn apply_to_series(
        &self,
        u: &UnivariateSeries,
        v: &UnivariateSeries,
    ) -> Result<UnivariateSeries> {
        let d = self.degree_bound.min(u.bound()).min(v.bound());
        let ring = &self.coeff_ring;
        let mut u_pows = Vec::with_capacity(self.degree_bound as usize + 1);
        let mut one = UnivariateSeries::zero(ring, d);
        one.coeffs[0] = ring.one();
        u_pows.push(one);
        for k in 1..=self.degree_bound as usize {
            u_pows.push(u_pows[k - 1].mul(u)?);
        }
        // Horner in v: sum_j (sum_i a_ij u^i) v^j
        let max_j = self.coeffs.keys().map(|&(_, j)| j).max().unwrap_or(0);
        let mut acc = UnivariateSeries::zero(ring, d);
        for j in (0..=max_j).rev() {
            if j < max_j {
                acc = acc.mul(v)?;
            }
            let mut sj = UnivariateSeries::zero(ring, d);
            for (&(i, jj), c) in &self.coeffs {
                if jj == j {
                    sj = sj.add(&u_pows[i as usize].scale_elem(c)?)?;
                }
            }
            acc = acc.add(&sj)?;
        }
        Ok(acc)
    }

    /// The n-series `[n]_F`: `[0] = 0`, `[n] = F(x, [n-1])`, negatives via
    /// the formal inverse (`[-n] = m([n])`).
    pub fn n_series(&self, n: i64) -> Result<UnivariateSeries> {
        let d = self.degree_bound;
        let x = UnivariateSeries::identity(&self.coeff_ring, d);
        let mut acc = UnivariateSeries::zero(&self.coeff_ring, d);
        for _ in 0..n.unsigned_abs() {
            acc = self.apply_to_series(&x, &acc)?;
        }
        if n < 0 {
            acc = self.formal_inverse()?.compose(&acc)?;
        }
        Ok(acc)
    }

    /// `omega(x) = dF/dy (x, 0) = sum_i a_{i,1} x^i`, with `omega(0) = 1`.
    pub fn omega_series(&self) -> Result<UnivariateSeries> {
        let d = self.degree_bound;
        let mut s = UnivariateSeries::zero(&self.coeff_ring, d);
        for (&(i, j), c) in &self.coeffs {
            if j == 1 {
                s.coeffs[i as usize] = c.clone();
            }
        }
        Ok(s)
    }

    /// The formal sum `F(a, b)` of two nilpotent weight-1 elements of `R`.
    ///
    /// For a truncated law the result is exact only when every product of
    /// more than `D` positive-weight generators of `R` vanishes; this is
    /// checked and refused otherwise.
    pub fn formal_sum(&self, a: &RingElement, b: &RingElement) -> Result<RingElement> {
        if a.ring() != b.ring() {
            return Err(Error::RingMismatch);
        }
        let ring = a.ring().clone();
        self.guard_ring_window(&ring, a, b)?;
        let d = self.degree_bound;
        let mut a_pows: Vec<RingElement> = vec![ring.one()];
        let mut b_pows: Vec<RingElement> = vec![ring.one()];
        for k in 1..=d as usize {
            a_pows.push(a_pows[k - 1].mul(a)?);
            b_pows.push(b_pows[k - 1].mul(b)?);
        }
        let mut acc = ring.zero();
        for (&(i, j), c) in &self.coeffs {
            let term = a_pows[i as usize].mul(&b_pows[j as usize])?;
            if term.is_zero() {
                continue;
            }
            acc = acc.add(&ring.transport(c)?.mul(&term)?)?;
        }
        Ok(acc)
    }

    /// Exactness guard for evaluating the truncated table on ring elements:
    /// products of total positive weight beyond the degree bound must
    /// vanish.
    fn guard_ring_window(
        &self,
        ring: &QuotientRing,
        a: &RingElement,
        b: &RingElement,
    ) -> Result<()> {
        if self.exact {
            return Ok(());
        }
        let d = self.degree_bound as i64;
        if let Some(w) = ring.positive_window() {
            if w <= d {
                return Ok(());
            }
        }
        // fall back to certifying the two elements directly
        let cap = self.degree_bound + 2;
        match (a.nilpotent_order(cap), b.nilpotent_order(cap)) {
            (Some(p), Some(q)) if (p as i64 - 1) + (q as i64 - 1) <= d => Ok(()),
            _ => Err(Error::TruncationTooSmall {
                needed: ring.positive_window().unwrap_or(i64::MAX),
                have: d,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::rat;

    #[test]
    fn additive_table() {
        let f = FormalGroupLaw::additive(3);
        assert!(f.coeff(1, 0).unwrap().is_one());
        assert!(f.coeff(0, 1).unwrap().is_one());
        assert!(f.coeff(1, 1).unwrap().is_zero());
        assert!(f.coeff(2, 1).unwrap().is_zero());
        assert!(f.check_axioms().unwrap().is_empty());
        let m = f.formal_inverse().unwrap();
        // m(x) = -x
        assert_eq!(m.get(1), f.coeff_ring().one().neg());
        assert!(m.get(2).is_zero() && m.get(3).is_zero());
    }

    #[test]
    fn multiplicative_table() {
        let f = FormalGroupLaw::multiplicative(6);
        let beta = f.coeff_ring().var("beta").unwrap();
        assert_eq!(f.coeff(1, 1).unwrap(), beta);
        assert!(f.coeff(2, 1).unwrap().is_zero());
        assert!(f.check_axioms().unwrap().is_empty());
    }

    #[test]
    fn multiplicative_inverse_series() {
        // m(x) = -x + beta x^2 - beta^2 x^3 + ...
        let f = FormalGroupLaw::multiplicative(5);
        let a = f.coeff_ring();
        let beta = a.var("beta").unwrap();
        let m = f.formal_inverse().unwrap();
        for k in 1..=5u32 {
            let expect = beta
                .pow(k - 1)
                .unwrap()
                .scale(&rat(if k % 2 == 1 { -1 } else { 1 }));
            assert_eq!(m.get(k as usize), expect, "coefficient {k}");
        }
        // F(x, m(x)) = 0
        let g = f
            .apply_to_series(&UnivariateSeries::identity(a, 5), &m)
            .unwrap();
        assert!(g.is_zero());
    }

    #[test]
    fn generic_from_log() {
        let f = FormalGroupLaw::generic(6).unwrap();
        let a = f.coeff_ring();
        // a_{1,1} = -2 b1
        let b1 = a.var("b1").unwrap();
        assert_eq!(f.coeff(1, 1).unwrap(), b1.scale(&rat(-2)));
        assert!(f.check_axioms().unwrap().is_empty());
        assert!(f.is_graded());
        assert!(FormalGroupLaw::additive(4).is_graded());
        assert!(FormalGroupLaw::multiplicative(4).is_graded());
    }

    #[test]
    fn from_log_zero_is_additive() {
        let q = QuotientRing::rationals();
        let zeros = vec![q.zero(); 5];
        let f = FormalGroupLaw::from_log(&q, &zeros, 6).unwrap();
        let add = FormalGroupLaw::additive(6);
        for i in 0..=6u32 {
            for j in 0..=6u32 {
                if (1..=6).contains(&(i + j)) {
                    assert_eq!(
                        f.coeff(i, j).unwrap().to_string(),
                        add.coeff(i, j).unwrap().to_string(),
                        "a_{{{i},{j}}}"
                    );
                }
            }
        }
    }

    #[test]
    fn generic_inverse_is_exp_of_minus_log() {
        let d = 6u32;
        let f = FormalGroupLaw::generic(d).unwrap();
        let a = f.coeff_ring().clone();
        let m = f.formal_inverse().unwrap();
        // independent route: m = exp(-log(x))
        let mut log = UnivariateSeries::identity(&a, d);
        for i in 1..d {
            log.coeffs[i as usize + 1] = a.var(&format!("b{i}")).unwrap();
        }
        let exp = log.compositional_inverse().unwrap();
        let minus_log = {
            let mut s = log.clone();
            for c in &mut s.coeffs {
                *c = c.neg();
            }
            s
        };
        let expect = exp.compose(&minus_log).unwrap();
        assert_eq!(m, expect);
    }

    #[test]
    fn from_log_needs_enough_coefficients() {
        let q = QuotientRing::rationals();
        assert_eq!(
            FormalGroupLaw::from_log(&q, &[q.zero()], 6),
            Err(Error::InsufficientLogCoefficients { needed: 5, got: 1 })
        );
    }

    #[test]
    fn broken_symmetry_is_detected() {
        let q = QuotientRing::rationals();
        let mut table = BTreeMap::new();
        table.insert((1, 0), q.one());
        table.insert((0, 1), q.one());
        table.insert((2, 1), q.one());
        assert!(FormalGroupLaw::explicit(&q, table, 4).is_err());
    }

    #[test]
    fn n_series_values() {
        let f = FormalGroupLaw::additive(5);
        let five = f.n_series(5).unwrap();
        assert_eq!(five.get(1), f.coeff_ring().constant(rat(5)));
        assert!((2..=5).all(|k| five.get(k).is_zero()));

        let fm = FormalGroupLaw::multiplicative(5);
        let a = fm.coeff_ring();
        let beta = a.var("beta").unwrap();
        let two = fm.n_series(2).unwrap();
        assert_eq!(two.get(1), a.constant(rat(2)));
        assert_eq!(two.get(2), beta);
        assert!(two.get(3).is_zero());

        let one = fm.n_series(1).unwrap();
        assert_eq!(one, UnivariateSeries::identity(a, 5));

        // [-1] = m
        assert_eq!(fm.n_series(-1).unwrap(), fm.formal_inverse().unwrap());
    }

    #[test]
    fn formal_sum_examples() {
        // additive: F(c, d) = c + d
        let f = FormalGroupLaw::additive(4);
        let r = QuotientRing::new(
            vec![
                Variable::nilpotent("c", 1, 2),
                Variable::nilpotent("d", 1, 2),
            ],
            None,
        )
        .unwrap();
        let c = r.var("c").unwrap();
        let d = r.var("d").unwrap();
        assert_eq!(f.formal_sum(&c, &d).unwrap(), c.add(&d).unwrap());

        // multiplicative over Q[beta][c,d]/(c^2,d^2): c + d + beta c d
        let fm = FormalGroupLaw::multiplicative(4);
        let r = QuotientRing::new(
            vec![
                Variable::new("beta", -1),
                Variable::nilpotent("c", 1, 2),
                Variable::nilpotent("d", 1, 2),
            ],
            None,
        )
        .unwrap();
        let c = r.var("c").unwrap();
        let d = r.var("d").unwrap();
        let beta = r.var("beta").unwrap();
        let expect = c
            .add(&d)
            .unwrap()
            .add(&beta.mul(&c.mul(&d).unwrap()).unwrap())
            .unwrap();
        assert_eq!(fm.formal_sum(&c, &d).unwrap(), expect);
    }

    #[test]
    fn formal_sum_with_inverse_vanishes() {
        let f = FormalGroupLaw::generic(6).unwrap();
        let ring = f
            .coeff_ring()
            .extend(vec![Variable::nilpotent("c", 1, 4)])
            .unwrap();
        let c = ring.var("c").unwrap();
        let m = f.formal_inverse().unwrap();
        let mc = c.eval_series(&m.coeffs).unwrap();
        assert!(f.formal_sum(&c, &mc).unwrap().is_zero());
    }

    #[test]
    fn truncation_guard_refuses_wide_rings() {
        let f = FormalGroupLaw::generic(4).unwrap();
        let ring = f
            .coeff_ring()
            .extend(vec![
                Variable::nilpotent("c", 1, 4),
                Variable::nilpotent("d", 1, 4),
            ])
            .unwrap()
            .with_truncation(None)
            .unwrap();
        let c = ring.var("c").unwrap();
        let d = ring.var("d").unwrap();
        // window 3 + 3 = 6 > 4 = D and no truncation rescues it
        assert!(matches!(
            f.formal_sum(&c, &d),
            Err(Error::TruncationTooSmall { .. })
        ));
        // the inherited weight truncation of the generic coefficient ring
        // makes the same computation exact again
        let ring = ring.with_truncation(Some(4)).unwrap();
        let c = ring.var("c").unwrap();
        let d = ring.var("d").unwrap();
        assert!(f.formal_sum(&c, &d).is_ok());
    }

    #[test]
    fn series_weights() {
        // m and [n] map weight-1 elements to weight-1 elements;
        // omega lands in weight 0
        let f = FormalGroupLaw::generic(7).unwrap();
        assert!(f.formal_inverse().unwrap().is_weight_homogeneous(1));
        assert!(f.n_series(3).unwrap().is_weight_homogeneous(1));
        assert!(f.n_series(-2).unwrap().is_weight_homogeneous(1));
        assert!(f.omega_series().unwrap().is_weight_homogeneous(0));
    }

    #[test]
    fn omega_series_values() {
        let f = FormalGroupLaw::additive(4);
        let w = f.omega_series().unwrap();
        assert!(w.get(0).is_one());
        assert!((1..=4).all(|k| w.get(k).is_zero()));

        let fm = FormalGroupLaw::multiplicative(4);
        let w = fm.omega_series().unwrap();
        assert!(w.get(0).is_one());
        assert_eq!(w.get(1), fm.coeff_ring().var("beta").unwrap());
        assert!((2..=4).all(|k| w.get(k).is_zero()));

        let fg = FormalGroupLaw::generic(5).unwrap();
        let w = fg.omega_series().unwrap();
        for i in 1..=4u32 {
            assert_eq!(w.get(i as usize), fg.coeff(i, 1).unwrap());
        }
    }

    #[test]
    fn config_round_trip() {
        let cfg: FglConfig =
            serde_json::from_str(r#"{"kind":"additive","D":6}"#).unwrap();
        let f = FormalGroupLaw::from_config(&cfg).unwrap();
        assert!(f.is_exact());

        let cfg: FglConfig =
            serde_json::from_str(r#"{"kind":"log","D":4,"log_coeffs":["1/2",null,"0"]}"#)
                .unwrap();
        let f = FormalGroupLaw::from_config(&cfg).unwrap();
        // b1 = 1/2 gives a_{1,1} = -1
        assert_eq!(f.coeff(1, 1).unwrap(), f.coeff_ring().constant(rat(-1)));
        assert!(f.check_axioms().unwrap().is_empty());
    }
}
