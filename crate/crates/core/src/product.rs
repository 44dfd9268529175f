//! The product-operator basis.
//!
//! A label has one letter per spin from {E, x, y, z}. The basis element for a
//! label with q non-E letters is 2^(q−1) times the Kronecker product of
//! {1, σx/2, σy/2, σz/2}, so `"zz"` is 2IzSz, `"xE"` is Ix and `"EE"` is the
//! identity. For q ≥ 1 the element equals half of the corresponding Pauli
//! string.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64 as C64;

use crate::linalg::CMatrix;
use crate::spin::{spins_for_dim, DensityState, SpinError, ALGEBRA_TOL, MAX_SPINS};

/// One factor of a product operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Letter {
    E,
    X,
    Y,
    Z,
}

impl Letter {
    pub const ALL: [Letter; 4] = [Letter::E, Letter::X, Letter::Y, Letter::Z];

    pub fn from_char(c: char) -> Result<Self, SpinError> {
        match c {
            'E' | 'e' => Ok(Letter::E),
            'x' | 'X' => Ok(Letter::X),
            'y' | 'Y' => Ok(Letter::Y),
            'z' | 'Z' => Ok(Letter::Z),
            other => Err(SpinError::BadLetter(other)),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::E => 'E',
            Letter::X => 'x',
            Letter::Y => 'y',
            Letter::Z => 'z',
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// A product-operator label, one letter per spin (spin 0 first).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductLabel(Vec<Letter>);

impl ProductLabel {
    pub fn new(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    /// The all-E label on `n` spins.
    pub fn identity(n: usize) -> Self {
        Self(vec![Letter::E; n])
    }

    /// A label with `letter` on spin `k` and E elsewhere.
    pub fn single(n: usize, k: usize, letter: Letter) -> Self {
        let mut l = Self::identity(n);
        l.0[k] = letter;
        l
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Number of non-E letters.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&l| l != Letter::E).count()
    }

    /// Position in canonical order: base-4 digits E<x<y<z, spin 0 most
    /// significant.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, l| acc * 4 + l.index())
    }

    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut letters = vec![Letter::E; n];
        for k in (0..n).rev() {
            letters[k] = Letter::ALL[index % 4];
            index /= 4;
        }
        Self(letters)
    }

    /// Bit masks (x-part, z-part) of the underlying Pauli string, using the
    /// same bit order as basis states.
    fn masks(&self) -> (usize, usize) {
        let n = self.n();
        let mut xm = 0;
        let mut zm = 0;
        for (k, l) in self.0.iter().enumerate() {
            let bit = 1 << (n - 1 - k);
            match l {
                Letter::E => {}
                Letter::X => xm |= bit,
                Letter::Y => {
                    xm |= bit;
                    zm |= bit;
                }
                Letter::Z => zm |= bit,
            }
        }
        (xm, zm)
    }
}

impl fmt::Display for ProductLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.as_char())?;
        }
        Ok(())
    }
}

impl FromStr for ProductLabel {
    type Err = SpinError;

    fn from_str(s: &str) -> Result<Self, SpinError> {
        let letters = s.chars().map(Letter::from_char).collect::<Result<Vec<_>, _>>()?;
        if letters.is_empty() || letters.len() > MAX_SPINS {
            return Err(SpinError::SpinCount(letters.len()));
        }
        Ok(Self(letters))
    }
}

/// Nonzero entries of a basis element: row r has a single entry in column
/// r ^ x_mask with the returned value.
fn element_entries(label: &ProductLabel) -> (usize, impl Fn(usize) -> C64) {
    let (xm, zm) = label.masks();
    let n_y = label.0.iter().filter(|&&l| l == Letter::Y).count();
    let q = label.weight();
    // Y = i·X·Z, so the Pauli string is i^{#Y} X^x Z^z.
    let iy = match n_y % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    let scale = if q == 0 { 1.0 } else { 0.5 };
    (xm, move |r: usize| {
        let c = r ^ xm;
        let sign = if (c & zm).count_ones().is_multiple_of(2) { 1.0 } else { -1.0 };
        iy * (scale * sign)
    })
}

/// Matrix of a product-operator basis element given as a label string such
/// as `"zz"` or `"xE"`.
pub fn basis_element(label: &str) -> Result<CMatrix, SpinError> {
    Ok(basis_matrix(&label.parse()?))
}

/// Matrix of a basis element; the label length fixes the spin count.
pub fn basis_matrix(label: &ProductLabel) -> CMatrix {
    let dim = 1 << label.n();
    let mut m = CMatrix::zeros(dim);
    let (xm, entry) = element_entries(label);
    for r in 0..dim {
        m[(r, r ^ xm)] = entry(r);
    }
    m
}

/// Tr(B·B) for the basis element with this label.
pub fn basis_norm(label: &ProductLabel) -> f64 {
    let dim = (1usize << label.n()) as f64;
    if label.weight() == 0 {
        dim
    } else {
        dim / 4.0
    }
}

/// Real coefficients of a Hermitian operator in the product-operator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductOperatorExpansion {
    n: usize,
    coeffs: Vec<f64>,
}

impl ProductOperatorExpansion {
    pub fn zero(n: usize) -> Self {
        Self { n, coeffs: vec![0.0; 1 << (2 * n)] }
    }

    /// Expansion with the listed terms; repeated labels accumulate.
    pub fn from_terms<S: AsRef<str>>(n: usize, terms: &[(S, f64)]) -> Result<Self, SpinError> {
        let mut e = Self::zero(n);
        for (label, c) in terms {
            let l: ProductLabel = label.as_ref().parse()?;
            e.check_label(&l)?;
            e.coeffs[l.index()] += c;
        }
        Ok(e)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn check_label(&self, l: &ProductLabel) -> Result<(), SpinError> {
        if l.n() != self.n {
            return Err(SpinError::LabelLength { label: alloc::format!("{l}"), got: l.n(), expected: self.n });
        }
        Ok(())
    }

    /// Coefficient of the label; zero for labels absent from the expansion.
    pub fn get(&self, label: &str) -> Result<f64, SpinError> {
        let l: ProductLabel = label.parse()?;
        self.check_label(&l)?;
        Ok(self.coeffs[l.index()])
    }

    pub fn coefficient(&self, label: &ProductLabel) -> f64 {
        self.coeffs.get(label.index()).copied().filter(|_| label.n() == self.n).unwrap_or(0.0)
    }

    pub fn set(&mut self, label: &ProductLabel, value: f64) -> Result<(), SpinError> {
        self.check_label(label)?;
        self.coeffs[label.index()] = value;
        Ok(())
    }

    /// All 4ⁿ coefficients in canonical label order.
    pub fn as_slice(&self) -> &[f64] {
        &self.coeffs
    }

    /// Labels whose coefficient exceeds `tol` in magnitude, canonical order.
    pub fn nonzero(&self, tol: f64) -> Vec<(ProductLabel, f64)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(i, &c)| (ProductLabel::from_index(self.n, i), c))
            .collect()
    }

    /// Largest coefficient difference, ignoring the identity term when
    /// `ignore_identity` is set.
    pub fn max_difference(&self, other: &Self, ignore_identity: bool) -> f64 {
        assert_eq!(self.n, other.n, "expansions on different spin counts");
        let skip = usize::from(ignore_identity);
        self.coeffs.iter().zip(&other.coeffs).skip(skip).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Human-readable sum such as `0.5 zE + 0.5 Ez + 0.5 zz`.
    pub fn describe(&self, tol: f64) -> String {
        use core::fmt::Write;
        let mut s = String::new();
        for (l, c) in self.nonzero(tol) {
            if !s.is_empty() {
                s.push_str(if c < 0.0 { " - " } else { " + " });
            } else if c < 0.0 {
                s.push('-');
            }
            let _ = write!(s, "{} {}", c.abs(), l);
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }
}

/// In-place fast Walsh–Hadamard transform (unnormalised).
fn walsh_hadamard(v: &mut [C64]) {
    let mut h = 1;
    while h < v.len() {
        for i in (0..v.len()).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (v[j], v[j + h]);
                v[j] = a + b;
                v[j + h] = a - b;
            }
        }
        h *= 2;
    }
}

/// Product-operator coefficients of a Hermitian matrix:
/// c_B = Tr(ρB)/Tr(B·B).
pub fn expand(rho: &DensityState) -> Result<ProductOperatorExpansion, SpinError> {
    expand_matrix(rho.matrix())
}

/// [`expand`] for a raw matrix; rejects non-Hermitian input.
pub fn expand_matrix(m: &CMatrix) -> Result<ProductOperatorExpansion, SpinError> {
    let n = spins_for_dim(m.dim())?;
    let err = m.hermiticity_error();
    if err > ALGEBRA_TOL * m.max_abs().max(1.0) {
        return Err(SpinError::NotHermitian(err));
    }
    let dim = m.dim();
    let mut out = ProductOperatorExpansion::zero(n);
    // For a fixed x-mask, Tr(ρ·X^x Z^z) = Σ_r (−1)^{|z ∧ c|} ρ[c, r] with
    // c = r ⊕ x, a Walsh–Hadamard transform over z.
    let mut w = vec![C64::new(0.0, 0.0); dim];
    for xm in 0..dim {
        for c in 0..dim {
            w[c] = m[(c, c ^ xm)];
        }
        walsh_hadamard(&mut w);
        for (zm, wz) in w.iter().enumerate() {
            let label = label_from_masks(n, xm, zm);
            let n_y = (xm & zm).count_ones();
            let iy = match n_y % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            let tr_pauli = iy * wz;
            let q = label.weight();
            let c = if q == 0 { tr_pauli.re / dim as f64 } else { 2.0 * tr_pauli.re / dim as f64 };
            out.coeffs[label.index()] = c;
        }
    }
    Ok(out)
}

fn label_from_masks(n: usize, xm: usize, zm: usize) -> ProductLabel {
    let letters = (0..n)
        .map(|k| {
            let bit = 1 << (n - 1 - k);
            match (xm & bit != 0, zm & bit != 0) {
                (false, false) => Letter::E,
                (true, false) => Letter::X,
                (true, true) => Letter::Y,
                (false, true) => Letter::Z,
            }
        })
        .collect();
    ProductLabel(letters)
}

/// Weighted sum of basis elements.
pub fn assemble(expansion: &ProductOperatorExpansion, n: usize) -> Result<DensityState, SpinError> {
    if expansion.n != n {
        return Err(SpinError::LabelLength { label: String::from("expansion"), got: expansion.n, expected: n });
    }
    let dim = 1 << n;
    let mut m = CMatrix::zeros(dim);
    for (i, &c) in expansion.coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let label = ProductLabel::from_index(n, i);
        let (xm, entry) = element_entries(&label);
        for r in 0..dim {
            m[(r, r ^ xm)] += entry(r) * c;
        }
    }
    Ok(DensityState::from_matrix_unchecked(m))
}

/// Convenience: assemble from `(label, coefficient)` pairs; the spin count
/// is taken from the first label.
pub fn assemble_labels(terms: &[(&str, f64)]) -> Result<DensityState, SpinError> {
    let n = terms.first().map(|(l, _)| l.chars().count()).ok_or(SpinError::SpinCount(0))?;
    assemble(&ProductOperatorExpansion::from_terms(n, terms)?, n)
}

/// The spin operator I_k^letter on spin `k` of `n` (e.g. Iz for letter z).
pub fn spin_operator(n: usize, k: usize, letter: Letter) -> CMatrix {
    basis_matrix(&ProductLabel::single(n, k, letter))
}
