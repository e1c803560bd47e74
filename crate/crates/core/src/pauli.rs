//! Gray-coded qubit encoding of the truncated Fock space and Pauli decomposition.
//!
//! Fock level `k` is stored in the computational basis state whose bits are the
//! binary-reflected Gray code `k ^ (k >> 1)`. Qubit 0 is the most significant bit,
//! both in bitstrings and in [`PauliString`] labels.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hamiltonian::{hermiticity_error, FockHamiltonian};
use crate::{CMatrix, Complex64};

/// Default magnitude below which Pauli coefficients are dropped, GHz.
pub const DEFAULT_DROP_TOL: f64 = 1e-9;

/// Gray code of `index` as an `n`-bit integer.
pub fn gray_code(index: usize, n: usize) -> Result<usize> {
    if n >= usize::BITS as usize || index >> n != 0 {
        return Err(Error::InvalidArgument(format!("index {index} out of range for {n} bits")));
    }
    Ok(index ^ (index >> 1))
}

/// Inverse of [`gray_code`].
pub fn gray_decode(bits: usize) -> usize {
    let mut index = bits;
    let mut shift = bits >> 1;
    while shift != 0 {
        index ^= shift;
        shift >>= 1;
    }
    index
}

/// Gray code of `index` rendered as an `n`-character bitstring, qubit 0 first.
pub fn gray_bitstring(index: usize, n: usize) -> Result<String> {
    Ok(format_bits(gray_code(index, n)?, n))
}

/// Parses a bitstring (qubit 0 first) and returns the Gray-decoded index.
pub fn gray_decode_str(bits: &str) -> Result<usize> {
    if bits.is_empty() || bits.len() >= usize::BITS as usize {
        return Err(Error::InvalidArgument(format!("bad bitstring '{bits}'")));
    }
    let value = bits.chars().try_fold(0usize, |acc, c| match c {
        '0' => Ok(acc << 1),
        '1' => Ok((acc << 1) | 1),
        _ => Err(Error::InvalidArgument(format!("bad bitstring '{bits}'"))),
    })?;
    Ok(gray_decode(value))
}

pub fn format_bits(value: usize, n: usize) -> String {
    (0..n)
        .map(|q| if value >> (n - 1 - q) & 1 == 1 { '1' } else { '0' })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    fn from_symbol(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    fn flips(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// Amplitude picked up when acting on computational bit `b`.
    fn phase(self, b: bool) -> Complex64 {
        match (self, b) {
            (Pauli::I, _) | (Pauli::X, _) | (Pauli::Z, false) => Complex64::new(1.0, 0.0),
            (Pauli::Z, true) => Complex64::new(-1.0, 0.0),
            (Pauli::Y, false) => Complex64::new(0.0, 1.0),
            (Pauli::Y, true) => Complex64::new(0.0, -1.0),
        }
    }
}

/// Tensor product of single-qubit Paulis, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Result<Self> {
        if ops.is_empty() {
            return Err(Error::InvalidArgument("empty Pauli string".into()));
        }
        Ok(Self(ops))
    }

    pub fn identity(n: usize) -> Self {
        Self(vec![Pauli::I; n])
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    pub fn qubit_count(&self) -> usize {
        self.0.len()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&p| p == Pauli::I)
    }

    /// True when every factor is I or Z.
    pub fn is_diagonal(&self) -> bool {
        self.0.iter().all(|&p| matches!(p, Pauli::I | Pauli::Z))
    }

    pub fn y_count(&self) -> usize {
        self.0.iter().filter(|&&p| p == Pauli::Y).count()
    }

    /// Bit-flip mask in the amplitude-index convention (qubit 0 = MSB).
    pub fn flip_mask(&self) -> usize {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.flips())
            .fold(0, |m, (q, _)| m | 1 << (n - 1 - q))
    }

    /// `P|col⟩ = phase · |col ^ flip_mask⟩`.
    pub fn phase_on(&self, col: usize) -> Complex64 {
        let n = self.0.len();
        self.0
            .iter()
            .enumerate()
            .fold(Complex64::new(1.0, 0.0), |acc, (q, p)| acc * p.phase(col >> (n - 1 - q) & 1 == 1))
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = 1 << self.0.len();
        let flip = self.flip_mask();
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            m[(col ^ flip, col)] = self.phase_on(col);
        }
        m
    }

    /// All `4^n` strings in lexicographic I < X < Y < Z order.
    pub fn enumerate(n: usize) -> impl Iterator<Item = PauliString> {
        (0..1usize << (2 * n)).map(move |code| {
            PauliString(
                (0..n)
                    .map(|q| Pauli::ALL[code >> (2 * (n - 1 - q)) & 3])
                    .collect(),
            )
        })
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let ops = s
            .chars()
            .map(|c| {
                Pauli::from_symbol(c)
                    .ok_or_else(|| Error::InvalidArgument(format!("bad Pauli label '{s}'")))
            })
            .collect::<Result<Vec<_>>>()?;
        PauliString::new(ops)
    }
}

impl Serialize for PauliString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One weighted Pauli string; serializes as `{"label": "XYI", "coeff": 0.25}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub label: PauliString,
    pub coeff: f64,
}

/// Real-weighted sum of Pauli strings on a fixed number of qubits.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PauliSum {
    terms: Vec<PauliTerm>,
    #[serde(skip)]
    qubit_count: usize,
}

impl PauliSum {
    /// Builds a sum, rejecting duplicate labels and mixed qubit counts.
    pub fn new(terms: Vec<PauliTerm>) -> Result<Self> {
        let qubit_count = terms
            .first()
            .map(|t| t.label.qubit_count())
            .ok_or_else(|| Error::InvalidArgument("Pauli sum needs at least one term".into()))?;
        let mut seen = std::collections::BTreeSet::new();
        for t in &terms {
            if t.label.qubit_count() != qubit_count {
                return Err(Error::InvalidArgument(format!(
                    "term {} does not act on {qubit_count} qubits",
                    t.label
                )));
            }
            if !t.coeff.is_finite() {
                return Err(Error::InvalidArgument(format!("term {} has non-finite coefficient", t.label)));
            }
            if !seen.insert(t.label.clone()) {
                return Err(Error::InvalidArgument(format!("duplicate term {}", t.label)));
            }
        }
        Ok(Self { terms, qubit_count })
    }

    pub fn identity(n: usize, coeff: f64) -> Self {
        Self {
            terms: vec![PauliTerm {
                label: PauliString::identity(n),
                coeff,
            }],
            qubit_count: n,
        }
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn qubit_count(&self) -> usize {
        self.qubit_count
    }

    pub fn dim(&self) -> usize {
        1 << self.qubit_count
    }

    /// Coefficient of the all-identity string, i.e. `Tr(H) / dim`.
    pub fn identity_coeff(&self) -> f64 {
        self.terms
            .iter()
            .find(|t| t.label.is_identity())
            .map_or(0.0, |t| t.coeff)
    }

    pub fn trace(&self) -> f64 {
        self.identity_coeff() * self.dim() as f64
    }

    pub fn to_dense(&self) -> CMatrix {
        let dim = self.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for t in &self.terms {
            let flip = t.label.flip_mask();
            for col in 0..dim {
                m[(col ^ flip, col)] += t.label.phase_on(col) * t.coeff;
            }
        }
        m
    }
}

impl<'de> Deserialize<'de> for PauliSum {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let terms = Vec::<PauliTerm>::deserialize(deserializer)?;
        PauliSum::new(terms).map_err(serde::de::Error::custom)
    }
}

/// Relabels a matrix so that `out[g(i)][g(j)] = m[i][j]`.
pub fn gray_permute(m: &CMatrix) -> Result<CMatrix> {
    let dim = m.nrows();
    if dim != m.ncols() || !dim.is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "Gray encoding needs a square power-of-two matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = dim.trailing_zeros() as usize;
    let mut out = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let gi = gray_code(i, n)?;
        for j in 0..dim {
            out[(gi, gray_code(j, n)?)] = m[(i, j)];
        }
    }
    Ok(out)
}

/// Pauli decomposition of `m` after Gray relabelling, keeping `|c_P| > drop_tol`.
///
/// `c_P = Tr(P · H') / dim`. The matrix must be square, of size `2^n`, and
/// Hermitian within 1e-10.
pub fn encode_matrix(m: &CMatrix, drop_tol: f64) -> Result<PauliSum> {
    let permuted = gray_permute(m)?;
    let herm = hermiticity_error(&permuted);
    if herm > 1e-10 {
        return Err(Error::InvalidArgument(format!(
            "matrix is not Hermitian (max deviation {herm:e})"
        )));
    }
    decompose(&permuted, drop_tol)
}

/// Pauli decomposition of an already-permuted Hermitian matrix.
fn decompose(m: &CMatrix, drop_tol: f64) -> Result<PauliSum> {
    let dim = m.nrows();
    let n = dim.trailing_zeros() as usize;
    let mut terms = Vec::new();
    for label in PauliString::enumerate(n) {
        let flip = label.flip_mask();
        // Tr(P M) = Σ_col ⟨col^flip|P|col⟩ M[col][col^flip]
        let trace: Complex64 = (0..dim)
            .map(|col| label.phase_on(col) * m[(col, col ^ flip)])
            .sum();
        let coeff = trace.re / dim as f64;
        if coeff.abs() > drop_tol {
            terms.push(PauliTerm { label, coeff });
        }
    }
    if terms.is_empty() {
        // The zero operator still needs a qubit count.
        terms.push(PauliTerm {
            label: PauliString::identity(n),
            coeff: 0.0,
        });
    }
    PauliSum::new(terms)
}

/// Gray-coded Pauli decomposition of an 8-level Fock Hamiltonian.
pub fn encode_pauli(h: &FockHamiltonian, drop_tol: f64) -> Result<PauliSum> {
    if h.dim() != 8 {
        return Err(Error::InvalidArgument(format!(
            "3-qubit encoding needs an 8-level Hamiltonian, got {} levels",
            h.dim()
        )));
    }
    encode_matrix(&h.matrix, drop_tol)
}

/// Largest entrywise difference between the dense Pauli sum and the Gray-permuted source.
pub fn reconstruction_residual(sum: &PauliSum, source: &CMatrix) -> Result<f64> {
    let permuted = gray_permute(source)?;
    if permuted.nrows() != sum.dim() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    Ok((sum.to_dense() - permuted).map(|z| z.norm()).max())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gray_examples() {
        assert_eq!(gray_bitstring(0, 3).unwrap(), "000");
        assert_eq!(gray_bitstring(2, 3).unwrap(), "011");
        assert_eq!(gray_bitstring(7, 3).unwrap(), "100");
        assert!(gray_code(8, 3).is_err());
        assert_eq!(gray_decode_str("000").unwrap(), 0);
        assert_eq!(gray_decode_str("011").unwrap(), 2);
        assert!(gray_decode_str("01a").is_err());
        for k in 0..8 {
            assert_eq!(gray_decode(gray_code(k, 3).unwrap()), k);
        }
    }

    #[test]
    fn gray_neighbours_differ_by_one_bit() {
        for k in 0..7 {
            let diff = gray_code(k, 3).unwrap() ^ gray_code(k + 1, 3).unwrap();
            assert_eq!(diff.count_ones(), 1);
        }
    }

    #[test]
    fn identity_decomposes_to_single_term() {
        let sum = encode_matrix(&CMatrix::identity(8, 8), DEFAULT_DROP_TOL).unwrap();
        assert_eq!(sum.len(), 1);
        assert_eq!(sum.terms()[0].label.to_string(), "III");
        assert!((sum.terms()[0].coeff - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pauli_dense_matches_kron() {
        let y: PauliString = "Y".parse().unwrap();
        let m = y.to_dense();
        assert_eq!(m[(1, 0)], Complex64::new(0.0, 1.0));
        assert_eq!(m[(0, 1)], Complex64::new(0.0, -1.0));
        let zx: PauliString = "ZX".parse().unwrap();
        let zx = zx.to_dense();
        // Z ⊗ X with the first factor on the most significant bit.
        assert_eq!(zx[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(zx[(3, 2)], Complex64::new(-1.0, 0.0));
    }

    #[test]
    fn rejects_bad_inputs() {
        let mut m = CMatrix::identity(8, 8);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(encode_matrix(&m, DEFAULT_DROP_TOL).is_err());
        assert!(encode_matrix(&CMatrix::identity(6, 6), DEFAULT_DROP_TOL).is_err());
        assert!("XQ".parse::<PauliString>().is_err());
        let dup = vec![
            PauliTerm { label: "XI".parse().unwrap(), coeff: 1.0 },
            PauliTerm { label: "XI".parse().unwrap(), coeff: 2.0 },
        ];
        assert!(PauliSum::new(dup).is_err());
    }

    #[test]
    fn json_shape() {
        let sum = PauliSum::new(vec![
            PauliTerm { label: "XYI".parse().unwrap(), coeff: 0.5 },
            PauliTerm { label: "ZZZ".parse().unwrap(), coeff: -1.25 },
        ])
        .unwrap();
        let text = serde_json::to_string(&sum).unwrap();
        assert_eq!(text, r#"[{"label":"XYI","coeff":0.5},{"label":"ZZZ","coeff":-1.25}]"#);
        let back: PauliSum = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sum);
        assert_eq!(back.qubit_count(), 3);
    }
}
