//! Cohomology-ring models of projective spaces, products, projective
//! bundles and projective completions, with Thom classes by three routes,
//! the diagonal class by two routes, restriction maps and tensor powers of
//! line classes.
//!
//! Generator conventions are tracked explicitly: `Canonical` tags the first
//! Chern class of the canonical line bundle, `Dual` that of its dual. The
//! two differ by the formal inverse series, which is recorded so duality
//! computations (which use the dual generator throughout) and Chern/Thom
//! relations (which use the canonical one) cannot be mixed up silently.

use crate::chern::{quotient_chern, twist_by_line, BundleData};
use crate::error::{Error, Result};
use crate::fgl::FormalGroupLaw;
use crate::ring::{QuotientRing, RingElement, Variable};

/// Which line bundle a generator is the first Chern class of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// `c_1` of the canonical line bundle.
    Canonical,
    /// `c_1` of the dual of the canonical line bundle.
    Dual,
}

/// Geometric role of a model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelKind {
    Point,
    ProjSpace(u32),
    Product(u32, u32),
    ProjBundle { rank: u32 },
    ThomModel { rank: u32 },
}

/// A quotient-ring model of the cohomology of a space, together with its
/// coefficient ring, geometric role and tagged generators.
#[derive(Debug, Clone, PartialEq)]
pub struct CohomologyModel {
    ring: QuotientRing,
    coeff_ring: QuotientRing,
    kind: ModelKind,
    generators: Vec<(String, Convention)>,
    /// For bundle models: the defining bundle, re-rooted in `ring`.
    bundle: Option<BundleData>,
}

/// Reject a ring whose truncation window is smaller than the sum of the
/// nilpotency windows of its positive-weight generators; below that bound
/// truncation could discard terms that still matter.
fn enforce_window(ring: &QuotientRing) -> Result<()> {
    if let (Some(w), Some(span)) = (ring.truncation(), ring.positive_span()) {
        if span > w {
            return Err(Error::TruncationTooSmall { needed: span, have: w });
        }
    }
    Ok(())
}

impl CohomologyModel {
    /// The model of the base point: the coefficient ring itself.
    pub fn point(coeff_ring: &QuotientRing) -> Self {
        CohomologyModel {
            ring: coeff_ring.clone(),
            coeff_ring: coeff_ring.clone(),
            kind: ModelKind::Point,
            generators: Vec::new(),
            bundle: None,
        }
    }

    /// `H(P^n) = A[g]/(g^(n+1))` with the generator tagged by convention.
    pub fn projspace(
        coeff_ring: &QuotientRing,
        n: u32,
        convention: Convention,
        gen_name: &str,
    ) -> Result<Self> {
        let ring = coeff_ring.extend(vec![Variable::nilpotent(gen_name, 1, n + 1)])?;
        enforce_window(&ring)?;
        Ok(CohomologyModel {
            ring,
            coeff_ring: coeff_ring.clone(),
            kind: ModelKind::ProjSpace(n),
            generators: vec![(gen_name.to_string(), convention)],
            bundle: None,
        })
    }

    /// `H(P^n x P^m) = A[c,d]/(c^(n+1), d^(m+1))`, both generators with the
    /// same convention.
    pub fn product(
        coeff_ring: &QuotientRing,
        n: u32,
        m: u32,
        convention: Convention,
        names: (&str, &str),
    ) -> Result<Self> {
        let ring = coeff_ring.extend(vec![
            Variable::nilpotent(names.0, 1, n + 1),
            Variable::nilpotent(names.1, 1, m + 1),
        ])?;
        enforce_window(&ring)?;
        Ok(CohomologyModel {
            ring,
            coeff_ring: coeff_ring.clone(),
            kind: ModelKind::Product(n, m),
            generators: vec![
                (names.0.to_string(), convention),
                (names.1.to_string(), convention),
            ],
            bundle: None,
        })
    }

    /// The projective bundle `P(E)` of a split bundle: the canonical
    /// generator `xi = c_1(L)` satisfies
    /// `sum_i c_i(E) (-xi)^(n-i) = 0`, i.e. `(-1)^n prod_i (xi - x_i) = 0`.
    pub fn proj_bundle(e: &BundleData, gen_name: &str) -> Result<Self> {
        Self::bundle_model(e, gen_name, false)
    }

    /// The projective completion `P(E + 1)`: the relation gains the extra
    /// zero root, `xi * prod_i (xi - x_i) = 0`, with basis `1..xi^n`.
    pub fn thom(e: &BundleData, gen_name: &str) -> Result<Self> {
        Self::bundle_model(e, gen_name, true)
    }

    fn bundle_model(e: &BundleData, gen_name: &str, completed: bool) -> Result<Self> {
        let roots = e.roots().ok_or(Error::RootsRequired)?.to_vec();
        let base = e.ring().clone();
        let n = roots.len() as u32;
        let degree = if completed { n + 1 } else { n };
        if degree == 0 {
            return Err(Error::Config("projective bundle of rank 0".into()));
        }

        let plain = base.extend(vec![Variable::new(gen_name, 1)])?;
        let xi = plain.var(gen_name)?;
        // The defining relation sum_i c_i(E) (-xi)^(rank-i) = 0 (with the
        // extra zero root for the completion) rearranges to the monic form
        // xi^degree = sum_{i=1}^{n} (-1)^(i+1) e_i(x) xi^(degree-i).
        let elementary = crate::chern::elementary_from_roots(
            &plain,
            &roots
                .iter()
                .map(|r| plain.transport(r))
                .collect::<Result<Vec<_>>>()?,
        )?;
        let mut rhs = plain.zero();
        for i in 1..=n {
            let sign = if i % 2 == 1 { 1 } else { -1 };
            let term = elementary[i as usize - 1]
                .mul(&xi.pow(degree - i)?)?
                .scale(&crate::ring::rat(sign));
            rhs = rhs.add(&term)?;
        }
        let ring = plain.with_monic_relation(gen_name, degree, &rhs)?;
        enforce_window(&ring)?;

        let re_rooted = BundleData::from_roots(
            &ring,
            roots
                .iter()
                .map(|r| ring.transport(r))
                .collect::<Result<Vec<_>>>()?,
        )?;
        Ok(CohomologyModel {
            ring,
            coeff_ring: base,
            kind: if completed {
                ModelKind::ThomModel { rank: n }
            } else {
                ModelKind::ProjBundle { rank: n }
            },
            generators: vec![(gen_name.to_string(), Convention::Canonical)],
            bundle: Some(re_rooted),
        })
    }

    pub fn ring(&self) -> &QuotientRing {
        &self.ring
    }

    pub fn coeff_ring(&self) -> &QuotientRing {
        &self.coeff_ring
    }

    pub fn kind(&self) -> &ModelKind {
        &self.kind
    }

    pub fn generators(&self) -> &[(String, Convention)] {
        &self.generators
    }

    pub fn bundle(&self) -> Option<&BundleData> {
        self.bundle.as_ref()
    }

    /// The generator as stored.
    pub fn generator(&self, idx: usize) -> Result<RingElement> {
        let (name, _) = self
            .generators
            .get(idx)
            .ok_or_else(|| Error::Config(format!("no generator {idx}")))?;
        self.ring.var(name)
    }

    /// The canonical-convention class of generator `idx`, converting through
    /// the formal inverse when the stored tag is `Dual` (and vice versa:
    /// `m` is an involution up to the degree bound).
    pub fn class_with_convention(
        &self,
        f: &FormalGroupLaw,
        idx: usize,
        want: Convention,
    ) -> Result<RingElement> {
        let (name, have) = self
            .generators
            .get(idx)
            .cloned()
            .ok_or_else(|| Error::Config(format!("no generator {idx}")))?;
        let g = self.ring.var(&name)?;
        if have == want {
            Ok(g)
        } else {
            let m = f.formal_inverse()?;
            g.eval_series(&m.coeffs).map_err(|e| match e {
                Error::NonTerminating => Error::TruncationTooSmall {
                    needed: self.ring.positive_span().unwrap_or(i64::MAX),
                    have: f.degree_bound() as i64,
                },
                other => other,
            })
        }
    }
}

/// Which of the three Thom-class expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThomRoute {
    /// `sum_i p^*(c_i(E)) (-c_1(L))^(n-i)`, the defining relation form.
    Relation,
    /// `c_n(L^v (x) p^(-1) E) = prod_i F(m(xi), x_i)`, the twisted form.
    Twist,
    /// `c_n(Q)` for the universal quotient bundle `Q = p^(-1)(E+1)/L`.
    Quotient,
}

/// The Thom class of the split bundle underlying a `ThomModel`, by the
/// requested route; all three reduce to the same normal form.
pub fn thom_class(
    f: &FormalGroupLaw,
    model: &CohomologyModel,
    route: ThomRoute,
) -> Result<RingElement> {
    let n = match model.kind() {
        ModelKind::ThomModel { rank } => *rank,
        _ => return Err(Error::Config("thom_class needs a ThomModel".into())),
    };
    let ring = model.ring().clone();
    let bundle = model.bundle().ok_or(Error::RootsRequired)?;
    let xi = model.generator(0)?;

    match route {
        ThomRoute::Relation => {
            let classes = bundle.chern_classes()?;
            let mut acc = xi.neg().pow(n)?;
            for (i, c) in classes.iter().enumerate() {
                acc = acc.add(&c.mul(&xi.neg().pow(n - 1 - i as u32)?)?)?;
            }
            Ok(acc)
        }
        ThomRoute::Twist => {
            let m = f.formal_inverse()?;
            let mxi = xi.eval_series(&m.coeffs).map_err(|e| match e {
                Error::NonTerminating => Error::TruncationTooSmall {
                    needed: ring.positive_span().unwrap_or(i64::MAX),
                    have: f.degree_bound() as i64,
                },
                other => other,
            })?;
            let mut acc = ring.one();
            for root in bundle.roots().ok_or(Error::RootsRequired)? {
                acc = acc.mul(&f.formal_sum(&mxi, root)?)?;
            }
            Ok(acc)
        }
        ThomRoute::Quotient => {
            if n == 0 {
                return Ok(ring.one()); // c_0 of the rank-0 quotient
            }
            let mut big_roots = bundle.roots().ok_or(Error::RootsRequired)?.to_vec();
            big_roots.push(ring.zero()); // E + 1
            let big = BundleData::from_roots(&ring, big_roots)?;
            let sub = BundleData::from_roots(&ring, vec![xi])?;
            let q = quotient_chern(&big, &sub)?;
            Ok(q.chern_classes()?[n as usize - 1].clone())
        }
    }
}

/// The closed form of the diagonal class of `P^n` in
/// `H(P^n x P^n)` with dual generators `c`, `d`:
/// `sum_{0<=i,j<=n} a_{1,i+j-n} c^i d^j` (with `a_{1,0} = 1` and
/// `a_{1,k} = 0` for `k < 0`).
pub fn diagonal_class_closed(
    f: &FormalGroupLaw,
    n: u32,
) -> Result<(CohomologyModel, RingElement)> {
    let model = CohomologyModel::product(
        f.coeff_ring(),
        n,
        n,
        Convention::Dual,
        ("c", "d"),
    )?;
    let elem = diagonal_closed_in(f, &model, n)?;
    Ok((model, elem))
}

fn diagonal_closed_in(
    f: &FormalGroupLaw,
    model: &CohomologyModel,
    n: u32,
) -> Result<RingElement> {
    let ring = model.ring().clone();
    let c = model.generator(0)?;
    let d = model.generator(1)?;
    let mut acc = ring.zero();
    for i in 0..=n {
        for j in 0..=n {
            if i + j < n {
                continue;
            }
            let k = i + j - n;
            let a = if k == 0 { f.coeff_ring().one() } else { f.coeff(1, k)? };
            if a.is_zero() {
                continue;
            }
            let term = ring.transport(&a)?.mul(&c.pow(i)?)?.mul(&d.pow(j)?)?;
            acc = acc.add(&term)?;
        }
    }
    Ok(acc)
}

/// The diagonal class computed directly as the top Chern class
/// `c_n(L_1^v (x) Q_2)` of the twisted universal quotient bundle, via the
/// splitting principle. Must agree with [`diagonal_class_closed`].
pub fn diagonal_class_direct(
    f: &FormalGroupLaw,
    n: u32,
) -> Result<(CohomologyModel, RingElement)> {
    let model = CohomologyModel::product(
        f.coeff_ring(),
        n,
        n,
        Convention::Dual,
        ("c", "d"),
    )?;
    let ring = model.ring().clone();
    if n == 0 {
        return Ok((model, ring.one()));
    }
    // c_1(L_2) = m(d): convert the dual generator to the canonical class
    let c1_l2 = model.class_with_convention(f, 1, Convention::Canonical)?;
    // Q_2 is the quotient of the trivial rank-(n+1) bundle by L_2
    let big = BundleData::trivial(&ring, n as usize + 1);
    let sub = BundleData::from_roots(&ring, vec![c1_l2])?;
    let q2 = quotient_chern(&big, &sub)?;
    // twist by L_1^v, whose first Chern class is the dual generator c
    let c = model.generator(0)?;
    let twisted = twist_by_line(f, &c, &q2)?;
    let cn = twisted.chern_classes()?[n as usize - 1].clone();
    Ok((model, cn))
}

/// Restrict along the product of hyperplane embeddings
/// `P^n x P^n -> P^(n+1) x P^(n+1)`: generators map namewise into the
/// tighter nilpotencies.
pub fn restrict_hyperplane(
    e: &RingElement,
    to: &CohomologyModel,
) -> Result<RingElement> {
    to.ring().transport(e)
}

/// `c_1` of the `r`-th tensor power of a line bundle with first Chern class
/// `l`: the `r`-series evaluated on `l`.
pub fn tensor_power_c1(
    f: &FormalGroupLaw,
    l: &RingElement,
    r: i64,
) -> Result<RingElement> {
    let series = f.n_series(r)?;
    l.eval_series(&series.coeffs).map_err(|e| match e {
        Error::NonTerminating => Error::TruncationTooSmall {
            needed: l.ring().positive_span().unwrap_or(i64::MAX),
            have: f.degree_bound() as i64,
        },
        other => other,
    })
}
