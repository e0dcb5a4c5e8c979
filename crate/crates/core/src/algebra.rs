//! Exact exterior algebra of `C^n`, `n <= 4`.
//!
//! A basis element `dx_I` is stored as a [`Blade`], the bitmask of its
//! multi-index (bit `i - 1` set when axis `i` belongs to `I`). An
//! [`AlgebraElement`] keeps one complex coefficient per blade, so the flat
//! coefficient vector has length `2^n` and each degree-`k` slice has
//! `binomial(n, k)` entries.
//!
//! The basis `dx_I` is orthonormal for [`inner`]. The interior product is
//! defined as the adjoint of the exterior product with respect to that inner
//! product, which fixes its sign convention.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 4;

/// Bitmask of a strictly increasing multi-index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Blade(pub u16);

impl Blade {
    pub const SCALAR: Blade = Blade(0);

    /// Basis 1-form `dx_axis` (axes are 1-based).
    pub fn axis(axis: usize) -> Blade {
        debug_assert!(axis >= 1 && axis <= MAX_DIM);
        Blade(1 << (axis - 1))
    }

    pub fn volume(n: usize) -> Blade {
        Blade(((1u32 << n) - 1) as u16)
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, axis: usize) -> bool {
        self.0 & (1 << (axis - 1)) != 0
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    /// Complement in `{1, ..., n}`.
    pub fn complement(self, n: usize) -> Blade {
        Blade(Blade::volume(n).0 & !self.0)
    }

    pub fn with_axis(self, axis: usize) -> Blade {
        Blade(self.0 | (1 << (axis - 1)))
    }

    pub fn without_axis(self, axis: usize) -> Blade {
        Blade(self.0 & !(1 << (axis - 1)))
    }

    /// Increasing list of (1-based) axes.
    pub fn axes(self) -> impl Iterator<Item = usize> {
        let bits = self.0;
        (0..16).filter(move |b| bits & (1 << b) != 0).map(|b| b + 1)
    }

    /// All blades of `Λ^k(R^n)` in increasing bitmask order.
    pub fn of_degree(n: usize, k: usize) -> impl Iterator<Item = Blade> {
        (0..(1u16 << n)).map(Blade).filter(move |b| b.degree() == k)
    }

    /// All `2^n` blades.
    pub fn all(n: usize) -> impl Iterator<Item = Blade> {
        (0..(1u16 << n)).map(Blade)
    }
}

/// Sign of `dx_I ∧ dx_J` relative to `dx_{I ∪ J}`; zero when `I ∩ J ≠ ∅`.
///
/// The sign is the parity of the number of pairs `(i, j)` with `i ∈ I`,
/// `j ∈ J` and `i > j`.
pub fn wedge_sign(a: Blade, b: Blade) -> i32 {
    if a.0 & b.0 != 0 {
        return 0;
    }
    let mut inversions = 0u32;
    let mut rest = b.0;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a.0 >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Strictly increasing multi-index `(ℓ_1 < ... < ℓ_k)` with entries in `1..=n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    entries: Vec<usize>,
}

impl MultiIndex {
    pub fn new(n: usize, entries: Vec<usize>) -> Result<Self> {
        if entries.iter().any(|&e| e == 0 || e > n) {
            return Err(Error::InvalidParameter(format!(
                "multi-index entries {entries:?} outside 1..={n}"
            )));
        }
        if entries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(format!(
                "multi-index {entries:?} is not strictly increasing"
            )));
        }
        Ok(Self { entries })
    }

    pub fn from_blade(blade: Blade) -> Self {
        Self {
            entries: blade.axes().collect(),
        }
    }

    pub fn blade(&self) -> Blade {
        Blade(self.entries.iter().fold(0u16, |acc, &e| acc | (1 << (e - 1))))
    }

    pub fn degree(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[usize] {
        &self.entries
    }

    /// The set `I^k_n`, lexicographically ordered.
    pub fn enumerate(n: usize, k: usize) -> Vec<MultiIndex> {
        fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == k {
                out.push(MultiIndex { entries: cur.clone() });
                return;
            }
            for e in start..=n {
                cur.push(e);
                rec(e + 1, n, k, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if k <= n {
            rec(1, n, k, &mut Vec::with_capacity(k), &mut out);
        }
        out
    }
}

impl std::fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.entries.is_empty() {
            return write!(f, "1");
        }
        write!(f, "dx_")?;
        for e in &self.entries {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

pub fn check_dim(n: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(n))
    }
}

/// An element of the full exterior algebra `Λ = Λ^0 ⊕ ... ⊕ Λ^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); 1 << n],
        })
    }

    pub fn basis(n: usize, blade: Blade) -> Result<Self> {
        let mut e = Self::zero(n)?;
        if blade.index() >= e.coeffs.len() {
            return Err(Error::InvalidParameter(format!("blade {blade:?} outside Λ(R^{n})")));
        }
        e.coeffs[blade.index()] = Complex64::new(1.0, 0.0);
        Ok(e)
    }

    pub fn from_coeffs(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        check_dim(n)?;
        if coeffs.len() != 1 << n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} coefficients, got {}",
                1 << n,
                coeffs.len()
            )));
        }
        Ok(Self { n, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn get(&self, blade: Blade) -> Complex64 {
        self.coeffs[blade.index()]
    }

    pub fn set(&mut self, blade: Blade, value: Complex64) {
        self.coeffs[blade.index()] = value;
    }

    /// Projection onto `Λ^k`.
    pub fn degree_part(&self, k: usize) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if Blade(i as u16).degree() == k {
                    c
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self { n: self.n, coeffs }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self {
            n: self.n,
            coeffs: self.coeffs.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// A 1-form `a = Σ a_k dx_k`, also used as a contraction direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector1Form {
    components: Vec<Complex64>,
}

impl Vector1Form {
    pub fn new(components: Vec<Complex64>) -> Result<Self> {
        check_dim(components.len())?;
        Ok(Self { components })
    }

    pub fn real(components: &[f64]) -> Result<Self> {
        Self::new(components.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn unit(n: usize, axis: usize) -> Result<Self> {
        check_dim(n)?;
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[axis - 1] = Complex64::new(1.0, 0.0);
        Ok(Self { components: c })
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn norm_sqr(&self) -> f64 {
        self.components.iter().map(|c| c.norm_sqr()).sum()
    }

    /// The same vector as an element of `Λ^1`.
    pub fn to_element(&self) -> AlgebraElement {
        let n = self.dim();
        let mut e = AlgebraElement::zero(n).expect("dimension checked at construction");
        for (k, &c) in self.components.iter().enumerate() {
            e.set(Blade::axis(k + 1), c);
        }
        e
    }
}

fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Exterior product `a ∧ b`.
pub fn wedge(a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
    same_dim(a.n, b.n)?;
    let mut out = AlgebraElement::zero(a.n)?;
    for (i, &ca) in a.coeffs.iter().enumerate() {
        if ca == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (j, &cb) in b.coeffs.iter().enumerate() {
            let s = wedge_sign(Blade(i as u16), Blade(j as u16));
            if s != 0 {
                out.coeffs[i | j] += ca * cb * s as f64;
            }
        }
    }
    Ok(out)
}

/// Interior product `a ⌟ u`, the adjoint of `u ↦ a ∧ u`.
///
/// `(a ⌟ v)_K = Σ_{k ∉ K} conj(a_k) sign(dx_k ∧ dx_K) v_{K ∪ {k}}`. For real
/// `a` this is the usual contraction; for complex `a` it is conjugate-linear
/// in `a`.
pub fn interior(a: &Vector1Form, u: &AlgebraElement) -> Result<AlgebraElement> {
    same_dim(a.dim(), u.n)?;
    let n = u.n;
    let mut out = AlgebraElement::zero(n)?;
    for target in Blade::all(n) {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 1..=n {
            if target.contains(k) {
                continue;
            }
            let s = wedge_sign(Blade::axis(k), target);
            acc += a.components[k - 1].conj() * u.get(target.with_axis(k)) * s as f64;
        }
        out.set(target, acc);
    }
    Ok(out)
}

/// Hodge star, `⋆ dx_I = sign(dx_I ∧ dx_{I^c}) dx_{I^c}`, extended complex-linearly.
pub fn hodge_star(u: &AlgebraElement) -> AlgebraElement {
    let n = u.n;
    let mut out = AlgebraElement::zero(n).expect("dimension checked at construction");
    for blade in Blade::all(n) {
        let c = u.get(blade);
        let comp = blade.complement(n);
        out.set(comp, c * wedge_sign(blade, comp) as f64);
    }
    out
}

/// Hermitian inner product, conjugate-linear in the second slot, with `dx_I`
/// orthonormal. Distinct degrees are orthogonal.
pub fn inner(u: &AlgebraElement, v: &AlgebraElement) -> Result<Complex64> {
    same_dim(u.n, v.n)?;
    Ok(u.coeffs.iter().zip(&v.coeffs).map(|(a, b)| a * b.conj()).sum())
}

/// `binomial(n, k)` for small arguments.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}
