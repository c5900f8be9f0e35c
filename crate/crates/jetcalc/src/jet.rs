//! Truncated multivariate Taylor jets.
//!
//! A [`Jet`] stores the Taylor coefficients `c_α = ∂^α f / α!` of a function
//! at a point, for every multi-index `α` in a downward-closed index set
//! described by an [`OrderSpec`]. Downward closure makes the truncated
//! product well defined: the coefficient of `α` in `f·g` only involves
//! coefficients at indices `β ≤ α`, all of which are present.
//!
//! Index sets are bounded by a total degree and, optionally, by per-group
//! degree caps. The Finsler code uses two groups (position `x` and direction
//! `y`) so that a jet can carry, say, up to five `y`-derivatives but only two
//! `x`-derivatives.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::JetError;
use crate::series;

const BITS: u32 = 5;
const MAX_VARS: usize = 12;
const MAX_TOTAL: u8 = 15;

/// Degree bound for a group of consecutive variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarGroup {
    pub start: usize,
    pub len: usize,
    pub cap: u8,
}

/// Describes which multi-indices a jet carries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct OrderSpec {
    nvars: usize,
    total: u8,
    groups: Vec<VarGroup>,
}

impl OrderSpec {
    /// All multi-indices in `nvars` variables with total degree at most `total`.
    pub fn total(nvars: usize, total: u8) -> Self {
        Self::new(nvars, total, Vec::new())
    }

    /// Two variable groups: the first `nx` variables with degree at most
    /// `x_cap`, the next `ny` with degree at most `y_cap`, and total degree at
    /// most `total`.
    pub fn split(nx: usize, ny: usize, x_cap: u8, y_cap: u8, total: u8) -> Self {
        Self::new(nx + ny, total, vec![VarGroup { start: 0, len: nx, cap: x_cap }, VarGroup { start: nx, len: ny, cap: y_cap }])
    }

    pub fn new(nvars: usize, total: u8, groups: Vec<VarGroup>) -> Self {
        assert!((1..=MAX_VARS).contains(&nvars), "jet variable count {nvars} out of range");
        assert!(total <= MAX_TOTAL, "jet total degree {total} too large");
        for g in &groups {
            assert!(g.start + g.len <= nvars, "variable group exceeds variable count");
        }
        // Caps at or above the total degree are redundant; dropping them keeps
        // equal index sets mapped to equal specs.
        let groups = groups.into_iter().filter(|g| g.len > 0 && g.cap < total).collect();
        Self { nvars, total, groups }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> u8 {
        self.total
    }

    /// The index set obtained after differentiating once in `var`.
    pub fn lowered(&self, var: usize) -> Self {
        let total = self.total.saturating_sub(1);
        let groups = self
            .groups
            .iter()
            .map(|g| {
                let mut g = *g;
                if var >= g.start && var < g.start + g.len {
                    g.cap = g.cap.saturating_sub(1);
                }
                g
            })
            .collect();
        Self::new(self.nvars, total, groups)
    }

    fn contains(&self, alpha: &[u8]) -> bool {
        let deg: u32 = alpha.iter().map(|&a| a as u32).sum();
        if deg > self.total as u32 {
            return false;
        }
        self.groups.iter().all(|g| {
            let d: u32 = alpha[g.start..g.start + g.len].iter().map(|&a| a as u32).sum();
            d <= g.cap as u32
        })
    }
}

fn encode(alpha: &[u8]) -> u64 {
    alpha.iter().enumerate().fold(0u64, |acc, (i, &a)| acc | ((a as u64) << (BITS * i as u32)))
}

/// Precomputed monomial table and truncated multiplication schedule.
pub struct JetSpace {
    spec: OrderSpec,
    monomials: Vec<u8>,
    degrees: Vec<u8>,
    factorials: Vec<f64>,
    lookup: HashMap<u64, u32>,
    /// For each left monomial `i`, the pairs `(j, k)` with `α_i + α_j = α_k`.
    mul_rows: Vec<Vec<(u32, u32)>>,
}

impl fmt::Debug for JetSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("JetSpace").field("spec", &self.spec).field("len", &self.len()).finish()
    }
}

fn cache() -> &'static Mutex<HashMap<OrderSpec, Arc<JetSpace>>> {
    static CACHE: OnceLock<Mutex<HashMap<OrderSpec, Arc<JetSpace>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

impl JetSpace {
    /// Shared space for `spec`; spaces are built once per process and cached.
    pub fn get(spec: &OrderSpec) -> Arc<JetSpace> {
        let mut guard = cache().lock().expect("jet space cache poisoned");
        if let Some(space) = guard.get(spec) {
            return Arc::clone(space);
        }
        let space = Arc::new(JetSpace::build(spec.clone()));
        guard.insert(spec.clone(), Arc::clone(&space));
        space
    }

    fn build(spec: OrderSpec) -> Self {
        let n = spec.nvars;
        // graded enumeration: degree 0, then 1, ...
        let mut monomials = Vec::new();
        let mut degrees = Vec::new();
        for deg in 0..=spec.total {
            let mut alpha = vec![0u8; n];
            enumerate_degree(&spec, &mut alpha, 0, deg, &mut |a| {
                monomials.extend_from_slice(a);
                degrees.push(deg);
            });
        }
        let count = degrees.len();
        let mut lookup = HashMap::with_capacity(count);
        let mut factorials = Vec::with_capacity(count);
        for k in 0..count {
            let alpha = &monomials[k * n..(k + 1) * n];
            lookup.insert(encode(alpha), k as u32);
            factorials.push(alpha.iter().map(|&a| factorial(a as u32)).product());
        }
        let codes: Vec<u64> = (0..count).map(|k| encode(&monomials[k * n..(k + 1) * n])).collect();
        let mut mul_rows = Vec::with_capacity(count);
        for i in 0..count {
            let mut row = Vec::new();
            for j in 0..count {
                if degrees[i] + degrees[j] > spec.total {
                    // degrees are sorted, nothing further fits
                    break;
                }
                if let Some(&k) = lookup.get(&(codes[i] + codes[j])) {
                    row.push((j as u32, k));
                }
            }
            mul_rows.push(row);
        }
        Self { spec, monomials, degrees, factorials, lookup, mul_rows }
    }

    pub fn spec(&self) -> &OrderSpec {
        &self.spec
    }

    pub fn nvars(&self) -> usize {
        self.spec.nvars
    }

    /// Number of stored coefficients.
    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn max_degree(&self) -> u8 {
        self.spec.total
    }

    pub fn monomial(&self, k: usize) -> &[u8] {
        let n = self.spec.nvars;
        &self.monomials[k * n..(k + 1) * n]
    }

    pub fn degree(&self, k: usize) -> u8 {
        self.degrees[k]
    }

    /// Position of the multi-index `alpha`, if the space carries it.
    pub fn index_of(&self, alpha: &[u8]) -> Option<usize> {
        if alpha.len() != self.spec.nvars || alpha.iter().any(|&a| a > MAX_TOTAL) {
            return None;
        }
        self.lookup.get(&encode(alpha)).map(|&k| k as usize)
    }
}

fn enumerate_degree(spec: &OrderSpec, alpha: &mut [u8], pos: usize, remaining: u8, f: &mut dyn FnMut(&[u8])) {
    if pos == alpha.len() - 1 {
        alpha[pos] = remaining;
        if spec.contains(alpha) {
            f(alpha);
        }
        alpha[pos] = 0;
        return;
    }
    for a in (0..=remaining).rev() {
        alpha[pos] = a;
        enumerate_degree(spec, alpha, pos + 1, remaining - a, f);
    }
    alpha[pos] = 0;
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(|v| v as f64).product()
}

/// A truncated Taylor expansion of a scalar function of several variables.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c != 0.0 {
                m.entry(&self.space.monomial(k), c);
            }
        }
        m.finish()
    }
}

impl Jet {
    pub fn zero(space: &Arc<JetSpace>) -> Self {
        Self { space: Arc::clone(space), coeffs: vec![0.0; space.len()] }
    }

    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Self {
        let mut j = Self::zero(space);
        j.coeffs[0] = value;
        j
    }

    /// The coordinate function `x_var` expanded around `value`.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Self {
        assert!(var < space.nvars(), "variable index {var} out of range");
        let mut j = Self::constant(space, value);
        let mut alpha = vec![0u8; space.nvars()];
        alpha[var] = 1;
        if let Some(k) = space.index_of(&alpha) {
            j.coeffs[k] = 1.0;
        }
        j
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// Taylor coefficient at multi-index `alpha` (zero if not carried).
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        self.space.index_of(alpha).map_or(0.0, |k| self.coeffs[k])
    }

    /// Partial derivative `∂^α f` at the expansion point.
    ///
    /// Panics if the space does not carry `alpha`: a silently zero
    /// derivative would be indistinguishable from a true zero.
    pub fn partial(&self, alpha: &[u8]) -> f64 {
        let k = self.space.index_of(alpha).unwrap_or_else(|| panic!("multi-index {alpha:?} not carried by {:?}", self.space.spec()));
        self.coeffs[k] * self.space.factorials[k]
    }

    /// Partial derivative with respect to the listed variables (repeats allowed),
    /// e.g. `&[0, 0, 2]` is `∂³f/∂x0²∂x2`.
    pub fn partial_wrt(&self, vars: &[usize]) -> f64 {
        let mut alpha = vec![0u8; self.space.nvars()];
        for &v in vars {
            alpha[v] += 1;
        }
        self.partial(&alpha)
    }

    /// First derivative in `var`, as a jet over the lowered index set.
    pub fn derivative(&self, var: usize) -> Jet {
        let target = JetSpace::get(&self.space.spec().lowered(var));
        let mut out = Jet::zero(&target);
        let mut alpha = vec![0u8; self.space.nvars()];
        for k in 0..target.len() {
            alpha.copy_from_slice(target.monomial(k));
            alpha[var] += 1;
            if let Some(src) = self.space.index_of(&alpha) {
                out.coeffs[k] = self.coeffs[src] * alpha[var] as f64;
            }
        }
        out
    }

    /// Re-expresses the jet over `target`, which must be a subset of the
    /// current index set over the same variables.
    pub fn restrict(&self, target: &Arc<JetSpace>) -> Jet {
        if Arc::ptr_eq(target, &self.space) {
            return self.clone();
        }
        assert_eq!(target.nvars(), self.space.nvars(), "restrict across variable counts");
        let mut out = Jet::zero(target);
        for k in 0..target.len() {
            let src =
                self.space.index_of(target.monomial(k)).unwrap_or_else(|| panic!("restrict target {:?} not inside {:?}", target.spec(), self.space.spec()));
            out.coeffs[k] = self.coeffs[src];
        }
        out
    }

    /// Moves the jet into a space over more variables: variable `i` of this
    /// jet becomes variable `var_map[i]` of the target. Target indices that
    /// involve other variables get zero coefficients; indices beyond this
    /// jet's truncation must not be relied upon by the caller.
    pub fn embed(&self, target: &Arc<JetSpace>, var_map: &[usize]) -> Jet {
        assert_eq!(var_map.len(), self.space.nvars());
        let mut out = Jet::zero(target);
        let mut alpha = vec![0u8; target.nvars()];
        for k in 0..self.space.len() {
            let c = self.coeffs[k];
            if c == 0.0 {
                continue;
            }
            alpha.iter_mut().for_each(|a| *a = 0);
            for (i, &a) in self.space.monomial(k).iter().enumerate() {
                alpha[var_map[i]] = a;
            }
            if let Some(dst) = target.index_of(&alpha) {
                out.coeffs[dst] = c;
            }
        }
        out
    }

    fn same_space(&self, other: &Jet) {
        debug_assert!(Arc::ptr_eq(&self.space, &other.space) || self.space.spec() == other.space.spec(), "jets from different spaces");
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { space: Arc::clone(&self.space), coeffs: self.coeffs.iter().map(|c| c * s).collect() }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// `self += a * b`, truncated.
    pub fn add_product(&mut self, a: &Jet, b: &Jet) {
        a.same_space(b);
        self.same_space(a);
        for (i, row) in a.space.mul_rows.iter().enumerate() {
            let ai = a.coeffs[i];
            if ai == 0.0 {
                continue;
            }
            for &(j, k) in row {
                self.coeffs[k as usize] += ai * b.coeffs[j as usize];
            }
        }
    }

    /// Evaluates `Σ_k series[k] (self − self(0))^k`, the composition of a
    /// univariate function with Taylor coefficients `series` at `self(0)`.
    pub fn compose(&self, series: &[f64]) -> Jet {
        let d = (self.space.max_degree() as usize).min(series.len().saturating_sub(1));
        if self.is_constant() || d == 0 {
            return Jet::constant(&self.space, series[0]);
        }
        let mut delta = self.clone();
        delta.coeffs[0] = 0.0;
        let mut acc = Jet::constant(&self.space, series[d]);
        for k in (0..d).rev() {
            let mut next = Jet::constant(&self.space, series[k]);
            next.add_product(&acc, &delta);
            acc = next;
        }
        acc
    }

    fn order(&self) -> usize {
        self.space.max_degree() as usize
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let u0 = self.value();
        if u0 == 0.0 {
            return Err(JetError::Domain { op: "division", value: u0 });
        }
        Ok(self.compose(&series::powi(u0, -1, self.order())))
    }

    pub fn div(&self, other: &Jet) -> Result<Jet, JetError> {
        Ok(self * &other.recip()?)
    }

    pub fn powi(&self, p: i32) -> Result<Jet, JetError> {
        let u0 = self.value();
        if p < 0 && u0 == 0.0 {
            return Err(JetError::Domain { op: "negative power", value: u0 });
        }
        if p >= 0 && self.is_constant() {
            return Ok(Jet::constant(&self.space, u0.powi(p)));
        }
        Ok(self.compose(&series::powi(u0, p, self.order())))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let u0 = self.value();
        if u0 < 0.0 || (u0 == 0.0 && !self.is_constant() && self.order() > 0) {
            return Err(JetError::Domain { op: "sqrt", value: u0 });
        }
        Ok(self.compose(&series::powf(u0, 0.5, self.order())))
    }

    pub fn exp(&self) -> Jet {
        self.compose(&series::exp(self.value(), self.order()))
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let u0 = self.value();
        if u0 <= 0.0 {
            return Err(JetError::Domain { op: "log", value: u0 });
        }
        Ok(self.compose(&series::ln(u0, self.order())))
    }

    pub fn sin(&self) -> Jet {
        self.compose(&series::sin(self.value(), self.order()))
    }

    pub fn cos(&self) -> Jet {
        self.compose(&series::cos(self.value(), self.order()))
    }

    pub fn tan(&self) -> Result<Jet, JetError> {
        let u0 = self.value();
        if u0.cos() == 0.0 || !u0.tan().is_finite() {
            return Err(JetError::Domain { op: "tan", value: u0 });
        }
        Ok(self.compose(&series::tan(u0, self.order())))
    }

    pub fn atan(&self) -> Jet {
        self.compose(&series::atan(self.value(), self.order()))
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect();
        Jet { space: Arc::clone(&self.space), coeffs }
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.same_space(rhs);
        let coeffs = self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect();
        Jet { space: Arc::clone(&self.space), coeffs }
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        let mut out = Jet::zero(&self.space);
        out.add_product(self, rhs);
        out
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        self.same_space(rhs);
        self.coeffs.iter_mut().zip(&rhs.coeffs).for_each(|(a, b)| *a += b);
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        (&self).neg()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * (1.0 + b.abs())
    }

    #[test]
    fn space_sizes() {
        // C(n + d, d)
        assert_eq!(JetSpace::get(&OrderSpec::total(2, 3)).len(), 10);
        assert_eq!(JetSpace::get(&OrderSpec::total(3, 2)).len(), 10);
        // x-degree <= 1, y-degree <= 1, two of each
        let s = JetSpace::get(&OrderSpec::split(2, 2, 1, 1, 2));
        assert_eq!(s.len(), 1 + 4 + 4);
    }

    #[test]
    fn product_rule() {
        let s = JetSpace::get(&OrderSpec::total(2, 3));
        let x = Jet::variable(&s, 0, 3.0);
        let y = Jet::variable(&s, 1, 5.0);
        let p = &x * &y;
        assert_eq!(p.value(), 15.0);
        assert_eq!(p.partial_wrt(&[0]), 5.0);
        assert_eq!(p.partial_wrt(&[1]), 3.0);
        assert_eq!(p.partial_wrt(&[0, 1]), 1.0);
        assert_eq!(p.partial_wrt(&[0, 0]), 0.0);
    }

    #[test]
    fn constant_has_zero_partials() {
        let s = JetSpace::get(&OrderSpec::total(3, 3));
        let c = Jet::constant(&s, 2.5).exp();
        assert!(c.coeffs()[1..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn sin_series_at_zero() {
        let s = JetSpace::get(&OrderSpec::total(1, 3));
        let x = Jet::variable(&s, 0, 0.0).sin();
        assert!(close(x.partial_wrt(&[0]), 1.0));
        assert!(close(x.partial_wrt(&[0, 0]), 0.0));
        assert!(close(x.partial_wrt(&[0, 0, 0]), -1.0));
    }

    #[test]
    fn reciprocal_inverts() {
        let s = JetSpace::get(&OrderSpec::total(2, 4));
        let x = Jet::variable(&s, 0, 0.7);
        let y = Jet::variable(&s, 1, -0.3);
        let u = (&x * &y).add_scalar(2.0).sin().add_scalar(1.5);
        let one = &u * &u.recip().unwrap();
        assert!(close(one.value(), 1.0));
        assert!(one.coeffs()[1..].iter().all(|c| c.abs() < 1e-13));
    }

    #[test]
    fn exp_log_roundtrip() {
        let s = JetSpace::get(&OrderSpec::total(2, 4));
        let x = Jet::variable(&s, 0, 0.4);
        let y = Jet::variable(&s, 1, 1.3);
        let u = (&x * &x + &y).add_scalar(0.2);
        let back = u.ln().unwrap().exp();
        for (a, b) in back.coeffs().iter().zip(u.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn tan_and_atan_invert() {
        let s = JetSpace::get(&OrderSpec::total(1, 5));
        let x = Jet::variable(&s, 0, 0.3);
        let back = x.atan().tan().unwrap();
        for (a, b) in back.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn sqrt_squares_back() {
        let s = JetSpace::get(&OrderSpec::total(2, 3));
        let x = Jet::variable(&s, 0, 2.0);
        let r = x.sqrt().unwrap();
        let sq = &r * &r;
        for (a, b) in sq.coeffs().iter().zip(x.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn domain_errors() {
        let s = JetSpace::get(&OrderSpec::total(1, 2));
        let zero = Jet::variable(&s, 0, 0.0);
        assert!(zero.ln().is_err());
        assert!(zero.recip().is_err());
        assert!(zero.sqrt().is_err());
        assert!(zero.powi(-2).is_err());
        assert!(Jet::variable(&s, 0, -1.0).sqrt().is_err());
        // polynomial powers are fine at zero
        assert_eq!(zero.powi(3).unwrap().partial_wrt(&[0, 0]), 0.0);
    }

    #[test]
    fn derivative_lowers_space() {
        let s = JetSpace::get(&OrderSpec::split(1, 1, 2, 3, 3));
        let x = Jet::variable(&s, 0, 1.5);
        let y = Jet::variable(&s, 1, 2.0);
        let f = &(&x * &x) * &y; // x^2 y
        let fx = f.derivative(0); // 2 x y
        assert_eq!(fx.space().spec(), &OrderSpec::split(1, 1, 1, 3, 2));
        assert!(close(fx.value(), 6.0));
        assert!(close(fx.partial_wrt(&[0]), 4.0));
        assert!(close(fx.partial_wrt(&[0, 1]), 2.0));
        let fxy = fx.derivative(1);
        assert!(close(fxy.value(), 3.0));
    }

    #[test]
    fn embed_moves_variables() {
        let small = JetSpace::get(&OrderSpec::total(1, 2));
        let big = JetSpace::get(&OrderSpec::total(2, 2));
        let x = Jet::variable(&small, 0, 0.5);
        let f = (&x * &x).embed(&big, &[1]);
        assert!(close(f.value(), 0.25));
        assert!(close(f.partial_wrt(&[1]), 1.0));
        assert!(close(f.partial_wrt(&[1, 1]), 2.0));
        assert_eq!(f.partial_wrt(&[0]), 0.0);
    }
}
