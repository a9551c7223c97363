//! Integer polynomials and their complex roots.
//!
//! Roots are found with Aberth–Ehrlich iteration in `f64` and then
//! certified: the Weierstrass corrections `W_i` give disks `|z − z_i| ≤ n|W_i|`
//! whose union holds every root, with a connected component of `k` disks
//! holding exactly `k` roots. Rounding in the evaluation is bounded and added
//! to the radii. Roots on the unit circle are never decided by a numerical
//! radius; they are caught exactly through `gcd(p, p*)` and certified by an
//! inversion symmetry argument (see [`isolate_roots`]).

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::seqcore::SequenceTable;
use crate::{Error, Result};

/// Integer polynomial, coefficients in ascending degree order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PolynomialSpec {
    #[serde(serialize_with = "ser_coeffs")]
    coeffs: Vec<BigInt>,
}

fn ser_coeffs<S: serde::Serializer>(v: &[BigInt], s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        seq.serialize_element(&x.to_string())?;
    }
    seq.end()
}

impl PolynomialSpec {
    pub fn new(coeffs: Vec<BigInt>) -> Result<Self> {
        let p = trim(coeffs);
        if p.len() < 2 {
            return Err(Error::invalid("polynomial must have degree at least 1"));
        }
        Ok(PolynomialSpec { coeffs: p })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    /// `x^d − x^{d−1} − 1`.
    pub fn trinomial(d: usize) -> Self {
        assert!(d >= 1, "degree must be positive");
        let mut c = vec![BigInt::zero(); d + 1];
        c[0] = BigInt::from(-1);
        c[d - 1] -= 1;
        c[d] += 1;
        PolynomialSpec { coeffs: trim(c) }
    }

    /// `x^d + x − 1`.
    pub fn alpha_polynomial(d: usize) -> Self {
        assert!(d >= 1, "degree must be positive");
        let mut c = vec![BigInt::zero(); d + 1];
        c[0] = BigInt::from(-1);
        c[1] += 1;
        c[d] += 1;
        PolynomialSpec { coeffs: trim(c) }
    }

    pub fn coefficients(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigInt {
        self.coeffs.last().expect("nonempty")
    }

    pub fn is_monic(&self) -> bool {
        self.leading().is_one()
    }

    /// `x^n p(1/x)`.
    pub fn reciprocal(&self) -> PolynomialSpec {
        let mut c = self.coeffs.clone();
        c.reverse();
        PolynomialSpec { coeffs: trim(c) }
    }

    pub fn eval_f64(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + big_f64(c);
        }
        acc
    }

    fn coeffs_f64(&self) -> Vec<f64> {
        self.coeffs.iter().map(big_f64).collect()
    }
}

impl std::fmt::Display for PolynomialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let show_coeff = !mag.is_one() || i == 0;
            if show_coeff {
                write!(f, "{mag}")?;
            }
            match i {
                0 => {}
                1 => write!(f, "x")?,
                _ => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

fn big_f64(c: &BigInt) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    p
}

// ---- exact polynomial arithmetic over Q ----

type QPoly = Vec<BigRational>;

fn to_q(p: &[BigInt]) -> QPoly {
    p.iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

fn q_trim(mut p: QPoly) -> QPoly {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
    if p.is_empty() {
        p.push(BigRational::zero());
    }
    p
}

fn q_is_zero(p: &QPoly) -> bool {
    p.iter().all(|c| c.is_zero())
}

fn q_deriv(p: &QPoly) -> QPoly {
    if p.len() < 2 {
        return vec![BigRational::zero()];
    }
    q_trim(
        (1..p.len())
            .map(|i| &p[i] * BigRational::from_integer(BigInt::from(i)))
            .collect(),
    )
}

fn q_sub(a: &QPoly, b: &QPoly) -> QPoly {
    let n = a.len().max(b.len());
    let z = BigRational::zero();
    q_trim(
        (0..n)
            .map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z))
            .collect(),
    )
}

fn q_divrem(a: &QPoly, b: &QPoly) -> (QPoly, QPoly) {
    let b = q_trim(b.clone());
    let db = b.len() - 1;
    let lead = b[db].clone();
    let mut r = q_trim(a.clone());
    if r.len() <= db {
        return (vec![BigRational::zero()], r);
    }
    let mut q = vec![BigRational::zero(); r.len() - db];
    while r.len() > db && !q_is_zero(&r) {
        let dr = r.len() - 1;
        let t = &r[dr] / &lead;
        for i in 0..=db {
            let v = &t * &b[i];
            r[dr - db + i] -= v;
        }
        q[dr - db] = t;
        r.pop();
        r = q_trim(r);
        if r.len() - 1 < db {
            break;
        }
    }
    (q_trim(q), r)
}

/// Monic gcd over Q.
fn q_gcd(a: &QPoly, b: &QPoly) -> QPoly {
    let mut x = q_trim(a.clone());
    let mut y = q_trim(b.clone());
    while !q_is_zero(&y) {
        let (_, r) = q_divrem(&x, &y);
        x = y;
        y = r;
    }
    let lead = x.last().cloned().unwrap_or_else(BigRational::one);
    if lead.is_zero() {
        return x;
    }
    x.into_iter().map(|c| c / &lead).collect()
}

/// Scale to a primitive integer polynomial with positive leading coefficient.
fn q_to_primitive(p: &QPoly) -> Vec<BigInt> {
    let p = q_trim(p.clone());
    let den = p
        .iter()
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = p.iter().map(|c| (c * &den).to_integer()).collect();
    let content = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    let mut out: Vec<BigInt> = if content.is_zero() {
        ints
    } else {
        ints.into_iter().map(|c| c / &content).collect()
    };
    if out.last().is_some_and(|c| c.is_negative()) {
        out.iter_mut().for_each(|c| *c = -&*c);
    }
    out
}

/// Yun's square-free factorization: `p = c·Π fᵢ^i` with the `fᵢ` square-free
/// and pairwise coprime. Factors of degree 0 are dropped.
pub fn squarefree_decomposition(p: &PolynomialSpec) -> Vec<(PolynomialSpec, usize)> {
    let a = to_q(&p.coeffs);
    let b = q_deriv(&a);
    let c = q_gcd(&a, &b);
    let mut w = q_divrem(&a, &c).0;
    let mut y = q_divrem(&b, &c).0;
    let mut z = q_sub(&y, &q_deriv(&w));
    let mut out = Vec::new();
    let mut i = 1;
    while w.len() > 1 {
        let g = q_gcd(&w, &z);
        if g.len() > 1 {
            out.push((
                PolynomialSpec {
                    coeffs: q_to_primitive(&g),
                },
                i,
            ));
        }
        w = q_divrem(&w, &g).0;
        y = q_divrem(&z, &g).0;
        z = q_sub(&y, &q_deriv(&w));
        i += 1;
    }
    out
}

/// Primitive `gcd(p, q)` over Z (up to sign), degree 0 when coprime.
pub fn gcd(p: &PolynomialSpec, q: &PolynomialSpec) -> Vec<BigInt> {
    q_to_primitive(&q_gcd(&to_q(&p.coeffs), &to_q(&q.coeffs)))
}

/// Exact quotient `p / d` as a primitive integer polynomial, `None` when
/// it is a constant.
fn exact_quotient(p: &PolynomialSpec, d: &[BigInt]) -> Result<Option<PolynomialSpec>> {
    let (q, r) = q_divrem(&to_q(&p.coeffs), &to_q(d));
    if !q_is_zero(&r) {
        return Err(Error::invalid("division is not exact"));
    }
    let q = q_to_primitive(&q);
    Ok((q.len() > 1).then_some(PolynomialSpec { coeffs: q }))
}

// ---- numerical roots ----

/// Where a certified root sits relative to the unit circle.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Inside,
    Outside,
    OnCircle,
    Ambiguous,
}

#[derive(Clone, Debug, Serialize)]
pub struct RootEnclosure {
    pub re: f64,
    pub im: f64,
    /// Disk radius; the disk holds exactly `multiplicity` roots counted
    /// with multiplicity (one distinct root).
    pub radius: f64,
    pub multiplicity: usize,
    pub location: Location,
}

impl RootEnclosure {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn modulus(&self) -> f64 {
        self.center().norm()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootSet {
    pub polynomial: String,
    pub roots: Vec<RootEnclosure>,
    pub count_outside_unit: usize,
    pub count_on_unit: usize,
    pub count_on_unit_ambiguous: usize,
}

impl RootSet {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn degree(&self) -> usize {
        self.roots.iter().map(|r| r.multiplicity).sum()
    }
}

const EPS: f64 = f64::EPSILON;

/// Aberth–Ehrlich iteration from points on a circle of the Cauchy radius.
fn aberth(c: &[f64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let bound = 1.0
        + c[..n]
            .iter()
            .map(|x| (x / lead).abs())
            .fold(0.0f64, f64::max);
    // start on a circle of the geometric mean radius, slightly rotated
    let r0 = (c[0] / lead).abs().powf(1.0 / n as f64).clamp(1e-3, bound);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64 + 0.4;
            Complex64::from_polar(r0, t)
        })
        .collect();
    let deriv: Vec<f64> = (1..=n).map(|i| c[i] * i as f64).collect();
    let eval = |p: &[f64], x: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &a in p.iter().rev() {
            acc = acc * x + a;
        }
        acc
    };
    for _ in 0..2000 {
        let mut max_step = 0.0f64;
        for i in 0..n {
            let pz = eval(c, z[i]);
            if pz.norm() == 0.0 {
                continue;
            }
            let ratio = pz / eval(&deriv, z[i]);
            let s: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * s);
            if step.is_finite() {
                z[i] -= step;
                max_step = max_step.max(step.norm() / z[i].norm().max(1e-300));
            }
        }
        if max_step < 4.0 * EPS {
            break;
        }
    }
    z
}

/// Certified radii `n·(|p(z_i)| + e_i) / (|lc|·Π|z_i − z_j|)`, inflated for
/// rounding in the product; `e_i` bounds the Horner rounding error and the
/// conversion of the coefficients to `f64`.
fn weierstrass_radii(p: &PolynomialSpec, z: &[Complex64]) -> Vec<f64> {
    let n = z.len();
    let c = p.coeffs_f64();
    let coef_err: Vec<f64> = p
        .coeffs
        .iter()
        .zip(&c)
        .map(|(exact, approx)| {
            let back = BigRational::from_float(*approx).unwrap_or_else(BigRational::zero);
            let diff = back - BigRational::from_integer(exact.clone());
            diff.abs().to_f64().unwrap_or(f64::INFINITY)
        })
        .collect();
    let lead = c[n].abs();
    z.iter()
        .enumerate()
        .map(|(i, &zi)| {
            let r = zi.norm();
            let mut abs_sum = 0.0;
            let mut err_sum = 0.0;
            let mut pw = 1.0;
            for k in 0..=n {
                abs_sum += c[k].abs() * pw;
                err_sum += coef_err[k] * pw;
                pw *= r;
            }
            let pv = p.eval_f64(zi).norm();
            // complex Horner: |error| ≤ γ_{4n+4}·Σ|a_k||z|^k, doubled for safety
            let gamma = (8.0 * (n as f64 + 1.0) * EPS) / (1.0 - 8.0 * (n as f64 + 1.0) * EPS);
            let num = (pv + gamma * abs_sum + err_sum) * (1.0 + 4.0 * EPS);
            let mut den = lead;
            for (j, &zj) in z.iter().enumerate() {
                if j != i {
                    den *= (zi - zj).norm();
                }
            }
            den *= 1.0 - 4.0 * (n as f64 + 2.0) * EPS;
            if den <= 0.0 {
                f64::INFINITY
            } else {
                n as f64 * num / den * (1.0 + 4.0 * EPS)
            }
        })
        .collect()
}

/// Connected components of the disk union, as index lists.
fn components(z: &[Complex64], r: &[f64]) -> Vec<Vec<usize>> {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() <= (r[i] + r[j]) * (1.0 + 4.0 * EPS) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..n {
        let root = find(&mut parent, i);
        groups.entry(root).or_default().push(i);
    }
    groups.into_values().collect()
}

fn locate(z: Complex64, r: f64) -> Location {
    let m = z.norm();
    // |z| carries a relative rounding error of a few ulps
    let slack = 4.0 * EPS * m;
    if m + r + slack < 1.0 {
        Location::Inside
    } else if m - r - slack > 1.0 {
        Location::Outside
    } else {
        Location::Ambiguous
    }
}

/// Disks for the roots of a square-free `p`, each isolating one root.
fn isolate_squarefree(p: &PolynomialSpec) -> Result<Vec<(Complex64, f64)>> {
    if p.degree() == 1 {
        let c = -big_f64(&p.coeffs[0]) / big_f64(&p.coeffs[1]);
        let exact = BigRational::new(-p.coeffs[0].clone(), p.coeffs[1].clone());
        let err = (exact - BigRational::from_float(c).unwrap_or_else(BigRational::zero))
            .abs()
            .to_f64()
            .unwrap_or(f64::INFINITY);
        return Ok(vec![(Complex64::new(c, 0.0), err * 2.0 + EPS * c.abs())]);
    }
    let z = aberth(&p.coeffs_f64());
    let r = weierstrass_radii(p, &z);
    for comp in components(&z, &r) {
        if comp.len() > 1 {
            return Err(Error::Certification(format!(
                "{} approximations of {p} share overlapping inclusion disks",
                comp.len()
            )));
        }
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::Certification(format!("non-finite radius for {p}")));
    }
    Ok(z.into_iter().zip(r).collect())
}

/// Whether the disk `(c, r)`, isolated from `others`, holds a root `z` with
/// `|z| = 1`, given that the roots in play are closed under `z ↦ 1/z̄`.
///
/// The image of the disk under `z ↦ 1/z̄` is again a disk; if it fits into
/// the doubled disk and the doubled disk meets no other enclosure, the root
/// in the disk is its own image.
fn certified_on_circle(c: Complex64, r: f64, others: &[(Complex64, f64)]) -> bool {
    let m2 = c.norm_sqr() - r * r;
    if m2 <= 0.0 {
        return false;
    }
    let ic = c / m2;
    let ir = r / m2;
    let big = 2.0 * r;
    let fits = (ic - c).norm() + ir <= big * (1.0 - 16.0 * EPS);
    let alone = others
        .iter()
        .all(|&(oc, or)| (oc - c).norm() > (big + or) * (1.0 + 16.0 * EPS));
    fits && alone
}

/// Certified enclosures of every root of `p`.
///
/// `p` is split into square-free parts; each part `q` into
/// `g = gcd(q, q*)` (which holds every unit-circle root, the rest coming in
/// pairs `z, 1/z̄`) and `q/g`, which has no root on the circle. Roots of `g`
/// are certified on the circle through [`certified_on_circle`]; all other
/// roots are located by their disks. With `precision > 53` bits each root
/// is additionally polished by fixed-point Newton steps and its radius
/// replaced by the Newton bound `n·|p/p′|` when the polished disks stay
/// disjoint.
pub fn isolate_roots(p: &PolynomialSpec, precision: u32) -> Result<RootSet> {
    if p.coeffs[0].is_zero() {
        return Err(Error::invalid(
            "root counting needs a nonzero constant term",
        ));
    }
    let mut roots = Vec::new();
    for (part, mult) in squarefree_decomposition(p) {
        let g_coeffs = gcd(&part, &part.reciprocal());
        let pieces: Vec<(PolynomialSpec, bool)> = if g_coeffs.len() > 1 {
            let h = exact_quotient(&part, &g_coeffs)?;
            let mut v = vec![(PolynomialSpec::new(g_coeffs)?, true)];
            if let Some(h) = h {
                v.push((h, false));
            }
            v
        } else {
            vec![(part.clone(), false)]
        };
        for (piece, symmetric) in pieces {
            let mut disks = isolate_squarefree(&piece)?;
            if precision > 53 {
                disks = polish(&piece, disks, precision);
            }
            for (i, &(c, r)) in disks.iter().enumerate() {
                let mut loc = locate(c, r);
                if symmetric && loc == Location::Ambiguous {
                    let others: Vec<(Complex64, f64)> = disks
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .map(|(_, d)| *d)
                        .collect();
                    if certified_on_circle(c, r, &others) {
                        loc = Location::OnCircle;
                    }
                }
                roots.push(RootEnclosure {
                    re: c.re,
                    im: c.im,
                    radius: r,
                    multiplicity: mult,
                    location: loc,
                });
            }
        }
    }
    roots.sort_by(|a, b| {
        b.modulus()
            .total_cmp(&a.modulus())
            .then(b.im.total_cmp(&a.im))
    });
    let count = |l: Location| {
        roots
            .iter()
            .filter(|r| r.location == l)
            .map(|r| r.multiplicity)
            .sum()
    };
    Ok(RootSet {
        polynomial: p.to_string(),
        count_outside_unit: count(Location::Outside),
        count_on_unit: count(Location::OnCircle),
        count_on_unit_ambiguous: count(Location::Ambiguous),
        roots,
    })
}

/// Number of roots (with multiplicity) strictly outside the unit disk.
/// Fails when some root cannot be placed relative to the circle.
pub fn count_outside_unit(p: &PolynomialSpec) -> Result<usize> {
    let mut last = None;
    for bits in [53, 128, 256] {
        let set = isolate_roots(p, bits)?;
        if set.count_on_unit_ambiguous == 0 {
            return Ok(set.count_outside_unit);
        }
        last = Some(set.count_on_unit_ambiguous);
    }
    Err(Error::Certification(format!(
        "{} roots of {p} stay ambiguous against the unit circle",
        last.unwrap_or(0)
    )))
}

/// Exactly one root outside the closed unit disk, real and greater than one,
/// and every other root strictly inside.
///
/// A factor `gcd(p, p*)` whose roots are all certified on the circle is
/// stripped first: such a factor is a product of cyclotomic-type factors and
/// the question is about the remaining irreducible part.
pub fn is_pisot(p: &PolynomialSpec) -> Result<bool> {
    let set = isolate_roots(p, 53)?;
    if set.count_on_unit_ambiguous > 0 {
        return Err(Error::Certification(format!(
            "roots of {p} too close to the unit circle"
        )));
    }
    let outside: Vec<&RootEnclosure> = set
        .roots
        .iter()
        .filter(|r| r.location == Location::Outside)
        .collect();
    if set.count_outside_unit != 1 || outside.len() != 1 {
        return Ok(false);
    }
    let dominant = outside[0];
    // a real root's disk meets the axis; with real coefficients and one root
    // in the disk it must be the real one
    let real = dominant.im.abs() <= dominant.radius && dominant.re > 1.0;
    if !real {
        return Ok(false);
    }
    if set.count_on_unit == 0 {
        return Ok(true);
    }
    // only a fully certified circle factor may be stripped
    let g = gcd(p, &p.reciprocal());
    let g = PolynomialSpec::new(g)?;
    let gset = isolate_roots(&g, 53)?;
    Ok(gset.count_on_unit == g.degree())
}

/// Product of root enclosures against `(−1)^n a₀/a_n`. Returns the
/// discrepancy and the propagated radius.
pub fn vieta_check(p: &PolynomialSpec, set: &RootSet) -> (f64, f64) {
    let mut prod = Complex64::new(1.0, 0.0);
    let mut upper = 1.0f64;
    let mut center_mag = 1.0f64;
    for r in &set.roots {
        for _ in 0..r.multiplicity {
            prod *= r.center();
            upper *= r.modulus() + r.radius;
            center_mag *= r.modulus();
        }
    }
    let n = p.degree();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let target = sign * big_f64(&p.coeffs[0]) / big_f64(p.leading());
    let slack = (upper - center_mag) + 8.0 * (n as f64) * EPS * upper;
    ((prod - Complex64::new(target, 0.0)).norm(), slack)
}

// ---- fixed-point polishing ----

/// Complex fixed point with `bits` fractional bits.
#[derive(Clone, Debug)]
struct CFix {
    re: BigInt,
    im: BigInt,
}

fn to_fix(x: f64, bits: u32) -> BigInt {
    let r = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    let s = r * BigRational::from_integer(BigInt::one() << bits as usize);
    s.floor().to_integer()
}

fn fix_mul(a: &CFix, b: &CFix, bits: u32) -> CFix {
    let s = bits as usize;
    CFix {
        re: (&a.re * &b.re - &a.im * &b.im) >> s,
        im: (&a.re * &b.im + &a.im * &b.re) >> s,
    }
}

fn fix_norm_f64(a: &CFix, bits: u32) -> f64 {
    let re = crate::precision::ext::scaled_to_f64(&a.re, bits);
    let im = crate::precision::ext::scaled_to_f64(&a.im, bits);
    re.hypot(im)
}

/// Newton steps in fixed point, then the bound `n·(|p| + e)/(|p′| − e)`.
/// Falls back to the input disks when the new disks are not disjoint or
/// not smaller.
fn polish(p: &PolynomialSpec, disks: Vec<(Complex64, f64)>, bits: u32) -> Vec<(Complex64, f64)> {
    let n = p.degree();
    let s = bits as usize;
    let coeffs: Vec<BigInt> = p.coeffs.iter().map(|c| c << s).collect();
    let dcoeffs: Vec<BigInt> = (1..=n).map(|i| (&p.coeffs[i] * i) << s).collect();
    let horner = |cs: &[BigInt], z: &CFix| -> (CFix, f64) {
        // truncation error grows by |z| + 1 ulps per step
        let mut acc = CFix {
            re: cs[cs.len() - 1].clone(),
            im: BigInt::zero(),
        };
        let zn = fix_norm_f64(z, bits);
        let mut err = 0.0f64;
        for c in cs[..cs.len() - 1].iter().rev() {
            acc = fix_mul(&acc, z, bits);
            acc.re += c;
            err = err * zn + 2.0;
        }
        (acc, err * (1.0 + 1e-12) + 2.0)
    };
    let ulp = 2f64.powi(-(bits as i32));
    let mut out = Vec::with_capacity(disks.len());
    for &(c, r) in &disks {
        let mut z = CFix {
            re: to_fix(c.re, bits),
            im: to_fix(c.im, bits),
        };
        for _ in 0..(bits / 40 + 4) {
            let (pv, _) = horner(&coeffs, &z);
            let (dv, _) = horner(&dcoeffs, &z);
            // z -= p/p′ with complex division in fixed point
            let den = (&dv.re * &dv.re + &dv.im * &dv.im) >> s;
            if den.is_zero() {
                break;
            }
            let num_re = (&pv.re * &dv.re + &pv.im * &dv.im) >> s;
            let num_im = (&pv.im * &dv.re - &pv.re * &dv.im) >> s;
            z.re -= (num_re << s) / &den;
            z.im -= (num_im << s) / &den;
        }
        let (pv, pe) = horner(&coeffs, &z);
        let (dv, de) = horner(&dcoeffs, &z);
        let pn = fix_norm_f64(&pv, bits) + pe * ulp;
        let dn = fix_norm_f64(&dv, bits) - de * ulp;
        let center = Complex64::new(
            crate::precision::ext::scaled_to_f64(&z.re, bits),
            crate::precision::ext::scaled_to_f64(&z.im, bits),
        );
        // rounding the center to f64 moves it by up to an ulp of |z|
        let shift = (center.norm() + 1.0) * EPS;
        let rad = if dn > 0.0 {
            n as f64 * pn / dn * (1.0 + 1e-12) + shift
        } else {
            f64::INFINITY
        };
        out.push((center, rad.min(r)));
    }
    let pts: Vec<Complex64> = out.iter().map(|d| d.0).collect();
    let rs: Vec<f64> = out.iter().map(|d| d.1).collect();
    if components(&pts, &rs).iter().all(|c| c.len() == 1) && out.len() == disks.len() {
        out
    } else {
        disks
    }
}

// ---- closed forms ----

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    /// `a_n = Σ cᵢ ρᵢⁿ` over the roots `ρᵢ` of the characteristic polynomial.
    Roots,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedFormDecomposition {
    pub roots: RootSet,
    /// `(re, im)` of each `cᵢ`, aligned with `roots.roots`.
    pub coefficients: Vec<(f64, f64)>,
    pub orientation: Orientation,
    /// Largest `n` up to which every reconstruction error stays below `2^{−32}`.
    pub valid_through: usize,
    pub max_error_in_range: f64,
}

impl ClosedFormDecomposition {
    pub fn coefficient(&self, i: usize) -> Complex64 {
        let (re, im) = self.coefficients[i];
        Complex64::new(re, im)
    }

    pub fn eval(&self, n: usize) -> Complex64 {
        self.roots
            .roots
            .iter()
            .enumerate()
            .map(|(i, r)| self.coefficient(i) * r.center().powu(n as u32))
            .sum()
    }
}

/// Solve `Σ cᵢ ρᵢⁿ = a_n`, `n = 1..L`, and test the formula on the whole table.
pub fn closed_form(seq: &SequenceTable) -> Result<ClosedFormDecomposition> {
    let spec = seq
        .recurrence()
        .ok_or_else(|| Error::invalid("closed forms need a recurrence-backed sequence"))?;
    let p = PolynomialSpec::new(spec.characteristic_polynomial())?;
    let roots = isolate_roots(&p, 53)?;
    if roots.roots.iter().any(|r| r.multiplicity > 1) {
        return Err(Error::invalid(
            "characteristic polynomial is not square-free",
        ));
    }
    let l = spec.order();
    if seq.len() < l {
        return Err(Error::invalid("table shorter than the recurrence order"));
    }
    let rho: Vec<Complex64> = roots.roots.iter().map(|r| r.center()).collect();
    // Vandermonde-type system, rows n = 1..L
    let mut m: Vec<Vec<Complex64>> = (1..=l)
        .map(|n| {
            let mut row: Vec<Complex64> = rho.iter().map(|r| r.powu(n as u32)).collect();
            row.push(Complex64::new(big_f64(seq.get(n)), 0.0));
            row
        })
        .collect();
    let c = complex_solve(&mut m)
        .ok_or_else(|| Error::Certification("closed-form system is singular".into()))?;
    let limit = 2f64.powi(-32);
    let mut valid_through = 0;
    let mut max_err = 0.0f64;
    for n in 1..=seq.len() {
        let v: Complex64 = c
            .iter()
            .zip(&rho)
            .map(|(ci, r)| ci * r.powu(n as u32))
            .sum();
        let exact = big_f64(seq.get(n));
        let err = (v - exact).norm();
        if !(err < limit) {
            break;
        }
        max_err = max_err.max(err);
        valid_through = n;
    }
    if valid_through < l {
        return Err(Error::Certification(format!(
            "closed form of `{}` fails already at n = {}",
            seq.name(),
            valid_through + 1
        )));
    }
    Ok(ClosedFormDecomposition {
        roots,
        coefficients: c.iter().map(|z| (z.re, z.im)).collect(),
        orientation: Orientation::Roots,
        valid_through,
        max_error_in_range: max_err,
    })
}

/// Gaussian elimination with partial pivoting on an augmented matrix.
fn complex_solve(m: &mut [Vec<Complex64>]) -> Option<Vec<Complex64>> {
    let n = m.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))?;
        if m[piv][col].norm() == 0.0 {
            return None;
        }
        m.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for k in col..=n {
                let t = f * m[col][k];
                m[r][k] -= t;
            }
        }
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for r in (0..n).rev() {
        let mut acc = m[r][n];
        for k in r + 1..n {
            acc -= m[r][k] * x[k];
        }
        x[r] = acc / m[r][r];
    }
    Some(x)
}

/// `|α_d·ρ_d − 1|` enclosed from above, with `α_d` the root of `x^d + x − 1`
/// in `(0, 1)` and `ρ_d` the real root above one of `x^d − x^{d−1} − 1`.
pub fn reciprocal_root_gap(d: usize, bits: u32) -> f64 {
    use crate::precision::constants::{alpha, dominant_trinomial_root};
    let a = alpha(d).refine(bits);
    let r = dominant_trinomial_root(d).refine(bits);
    let prod = a.mul(&r, bits);
    let one = crate::precision::ExtReal::exact_int(BigInt::one());
    let diff = prod.sub(&one);
    diff.to_f64().abs() + diff.error_f64()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seqcore::{generate_recurrent, RecurrenceSpec};

    fn poly(c: &[i64]) -> PolynomialSpec {
        PolynomialSpec::from_i64(c).unwrap()
    }

    #[test]
    fn display() {
        assert_eq!(PolynomialSpec::trinomial(3).to_string(), "x^3 - x^2 - 1");
        assert_eq!(poly(&[-5, -2, 1]).to_string(), "x^2 - 2x - 5");
    }

    #[test]
    fn alpha_cubic() {
        let set = isolate_roots(&poly(&[-1, 1, 0, 1]), 53).unwrap();
        let real: Vec<_> = set.roots.iter().filter(|r| r.im.abs() <= r.radius).collect();
        assert_eq!(real.len(), 1);
        assert!(real[0].re > 0.68 && real[0].re < 0.69);
        let pair: Vec<_> = set.roots.iter().filter(|r| r.im.abs() > r.radius).collect();
        assert_eq!(pair.len(), 2);
        // |θ|² · α = 1
        let m = pair[0].modulus();
        assert!((m - 1.0 / 0.682_327_803_828_019_3f64.sqrt()).abs() < 1e-12);
        assert!((m - 1.2106).abs() < 1e-4);
    }

    #[test]
    fn golden() {
        let set = isolate_roots(&poly(&[-1, -1, 1]), 53).unwrap();
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((set.roots[0].re - phi).abs() < 1e-14);
        assert!((set.roots[1].re + 1.0 / phi).abs() < 1e-14);
        assert!(is_pisot(&poly(&[-1, -1, 1])).unwrap());
    }

    #[test]
    fn sextic_trinomial() {
        let p = PolynomialSpec::trinomial(6);
        let set = isolate_roots(&p, 53).unwrap();
        assert_eq!(set.roots.len(), 6);
        assert!(set.roots.iter().all(|r| r.radius < 1e-10));
        assert!(count_outside_unit(&p).unwrap() >= 2);
        assert!(!is_pisot(&p).unwrap());
        let (gap, slack) = vieta_check(&p, &set);
        assert!(gap <= slack + 1e-12, "{gap} {slack}");
    }

    #[test]
    fn small_trinomials_are_pisot() {
        for d in 2..=5 {
            let p = PolynomialSpec::trinomial(d);
            assert_eq!(count_outside_unit(&p).unwrap(), 1, "d={d}");
            assert!(is_pisot(&p).unwrap(), "d={d}");
        }
    }

    #[test]
    fn unit_circle_factor_is_certified() {
        // x^5 − x^4 − 1 = (x² − x + 1)(x³ − x − 1)
        let set = isolate_roots(&PolynomialSpec::trinomial(5), 53).unwrap();
        assert_eq!(set.count_on_unit, 2);
        assert_eq!(set.count_on_unit_ambiguous, 0);
        assert_eq!(set.count_outside_unit, 1);
        let set = isolate_roots(&PolynomialSpec::trinomial(11), 53).unwrap();
        assert_eq!(set.count_on_unit, 2);
        // cyclotomic polynomials alone
        let set = isolate_roots(&poly(&[1, 1, 1, 1, 1]), 53).unwrap();
        assert_eq!(set.count_on_unit, 4);
        assert!(!is_pisot(&poly(&[1, 1, 1, 1, 1])).unwrap());
    }

    #[test]
    fn reciprocal_pair_off_the_circle() {
        // (x − 2)(2x − 1)(x² + 1)... keep it monic: x⁴ − 4x³ + ... use (x² − 3x + 1)(x² + 1)
        let p = poly(&[1, -3, 2, -3, 1]);
        let set = isolate_roots(&p, 53).unwrap();
        assert_eq!(set.count_on_unit, 2);
        assert_eq!(set.count_outside_unit, 1);
        assert_eq!(set.count_on_unit_ambiguous, 0);
    }

    #[test]
    fn repeated_factors() {
        // (x − 2)²(x + 3)
        let p = poly(&[12, -8, -1, 1]);
        let parts = squarefree_decomposition(&p);
        assert_eq!(parts.len(), 2);
        let set = isolate_roots(&p, 53).unwrap();
        assert_eq!(set.degree(), 3);
        assert_eq!(set.count_outside_unit, 3);
    }

    #[test]
    fn sixty() {
        let c = count_outside_unit(&PolynomialSpec::trinomial(60)).unwrap();
        assert!((17..=23).contains(&c), "{c}");
    }

    #[test]
    fn polishing_shrinks_radii() {
        let p = PolynomialSpec::trinomial(7);
        let a = isolate_roots(&p, 53).unwrap();
        let b = isolate_roots(&p, 200).unwrap();
        assert_eq!(a.count_outside_unit, b.count_outside_unit);
        let ra: f64 = a.roots.iter().map(|r| r.radius).fold(0.0, f64::max);
        let rb: f64 = b.roots.iter().map(|r| r.radius).fold(0.0, f64::max);
        assert!(rb <= ra);
    }

    #[test]
    fn narayana_closed_form() {
        let seq = generate_recurrent(&RecurrenceSpec::narayana(), 60).unwrap();
        let cf = closed_form(&seq).unwrap();
        assert!(cf.valid_through >= 25, "{}", cf.valid_through);
        let real_idx = cf
            .roots
            .roots
            .iter()
            .position(|r| r.im.abs() <= r.radius)
            .unwrap();
        let c1 = cf.coefficient(real_idx);
        assert!(c1.re > 0.0 && c1.im.abs() < 1e-12);
        let others: Vec<Complex64> = (0..3).filter(|&i| i != real_idx).map(|i| cf.coefficient(i)).collect();
        assert!((others[0] - others[1].conj()).norm() < 1e-12);
    }

    #[test]
    fn powers_and_sqrt6_closed_forms() {
        let spec = RecurrenceSpec::from_i64("pow2", &[2], &[2]).unwrap();
        let cf = closed_form(&generate_recurrent(&spec, 20).unwrap()).unwrap();
        assert!((cf.coefficient(0) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        let seq = generate_recurrent(&RecurrenceSpec::sqrt6_example(), 12).unwrap();
        assert_eq!(
            seq.terms()[..6],
            [1, 2, 3, 4, 29, 38].map(BigInt::from)
        );
        let cf = closed_form(&seq).unwrap();
        assert_eq!(cf.coefficients.len(), 4);
        assert!(cf.valid_through >= 6);
        assert!((cf.eval(5).re - 29.0).abs() < 1e-9);
    }

    #[test]
    fn reciprocal_roots() {
        for d in 2..=12 {
            assert!(reciprocal_root_gap(d, 128) < 1e-30, "d={d}");
        }
    }
}
