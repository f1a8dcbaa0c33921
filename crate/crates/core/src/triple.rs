//! Lattice Dirac operators, function representations and the grading, plus
//! a validator for the even spectral-triple identities.
//!
//! Sites are numbered `1..=N` at every public boundary. Matrices act on
//! column vectors, `(Mψ)_k = Σ_l M_{kl} ψ_l`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{commutator, spectral_norm, ComplexMatrix, C64};

/// Tolerance used to record whether a Dirac matrix is selfadjoint.
pub const SELFADJOINT_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Topology {
    Open,
    Closed,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Open => "open",
            Topology::Closed => "closed",
        })
    }
}

impl FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "open" => Ok(Topology::Open),
            "closed" => Ok(Topology::Closed),
            other => Err(Error::Config(format!("unknown topology `{other}`"))),
        }
    }
}

/// Number of sites and whether the last site connects back to the first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LatticeSpec {
    n_sites: usize,
    topology: Topology,
}

impl LatticeSpec {
    pub fn new(n_sites: usize, topology: Topology) -> Result<Self> {
        let min = match topology {
            Topology::Open => 2,
            // a 2-cycle would be a double arrow 1→2→1
            Topology::Closed => 3,
        };
        if n_sites < min {
            return Err(Error::TooSmall { got: n_sites, min });
        }
        Ok(LatticeSpec { n_sites, topology })
    }

    pub fn open(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, Topology::Open)
    }

    pub fn closed(n_sites: usize) -> Result<Self> {
        Self::new(n_sites, Topology::Closed)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DiracKind {
    /// The oriented adjacency block acting on `ℂ^N`, no doubling.
    AdjacencyPlain,
    /// `[[0, 𝒟†], [𝒟, 0]]` on `ℂ^{2N}` with the open adjacency block.
    AdjacencyDoubled,
    /// `(Ψ_{k+1} − Ψ_{k−1}) / 2i`, truncated at the open boundary.
    SymmetricDifference,
    /// Doubled operator built from the cyclic adjacency block.
    ClosedAdjacencyDoubled,
}

impl DiracKind {
    pub const ALL: [DiracKind; 4] = [
        DiracKind::AdjacencyPlain,
        DiracKind::AdjacencyDoubled,
        DiracKind::SymmetricDifference,
        DiracKind::ClosedAdjacencyDoubled,
    ];

    pub fn is_doubled(self) -> bool {
        matches!(self, DiracKind::AdjacencyDoubled | DiracKind::ClosedAdjacencyDoubled)
    }

    pub fn is_adjacency(self) -> bool {
        !matches!(self, DiracKind::SymmetricDifference)
    }

    pub fn topology(self) -> Topology {
        match self {
            DiracKind::ClosedAdjacencyDoubled => Topology::Closed,
            _ => Topology::Open,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DiracKind::AdjacencyPlain => "adjacency-plain",
            DiracKind::AdjacencyDoubled => "adjacency-doubled",
            DiracKind::SymmetricDifference => "symmetric-difference",
            DiracKind::ClosedAdjacencyDoubled => "closed-adjacency-doubled",
        }
    }
}

impl fmt::Display for DiracKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DiracKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DiracKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown dirac kind `{s}`")))
    }
}

/// A function on the lattice, one complex value per site.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeFunction {
    values: Vec<C64>,
}

impl LatticeFunction {
    pub fn new(values: Vec<C64>) -> Self {
        LatticeFunction { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        LatticeFunction {
            values: values.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn constant(n: usize, c: C64) -> Self {
        LatticeFunction { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    /// Value at 1-based site `k`.
    pub fn at(&self, k: usize) -> C64 {
        self.values[k - 1]
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|z| z.im == 0.0)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

/// Oriented path adjacency: ones on the first superdiagonal.
pub fn build_adjacency_block(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::TooSmall { got: n, min: 2 });
    }
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n - 1 {
        m[(k, k + 1)] = C64::new(1.0, 0.0);
    }
    Ok(m)
}

/// Oriented cycle adjacency: the path block plus the arrow `N → 1`.
pub fn build_closed_adjacency_block(n: usize) -> Result<ComplexMatrix> {
    if n < 3 {
        return Err(Error::TooSmall { got: n, min: 3 });
    }
    let mut m = build_adjacency_block(n)?;
    m[(n - 1, 0)] = C64::new(1.0, 0.0);
    Ok(m)
}

/// `[[0, block†], [block, 0]]`.
pub fn build_doubled_dirac(block: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !block.is_square() {
        return Err(Error::NotSquare {
            rows: block.rows(),
            cols: block.cols(),
        });
    }
    let n = block.rows();
    let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let b = block[(i, j)];
            m[(n + i, j)] = b;
            m[(j, n + i)] = b.conj();
        }
    }
    Ok(m)
}

/// Symmetric difference operator on `n` sites: `1/(2i)` on the superdiagonal,
/// `−1/(2i)` on the subdiagonal, nothing beyond the boundary.
pub fn build_symmetric_difference(n: usize) -> Result<ComplexMatrix> {
    if n < 2 {
        return Err(Error::TooSmall { got: n, min: 2 });
    }
    let up = C64::new(0.0, -0.5); // 1/(2i)
    let mut m = ComplexMatrix::zeros(n, n);
    for k in 0..n - 1 {
        m[(k, k + 1)] = up;
        m[(k + 1, k)] = -up;
    }
    Ok(m)
}

/// `diag(1, …, 1, −1, …, −1)` on `ℂ^{2n}`.
pub fn build_grading(n: usize) -> ComplexMatrix {
    let diag: Vec<f64> = (0..2 * n).map(|i| if i < n { 1.0 } else { -1.0 }).collect();
    ComplexMatrix::from_real_diag(&diag)
}

/// Multiplication operator of `f`, repeated on both copies when `doubled`.
pub fn represent(f: &LatticeFunction, doubled: bool) -> ComplexMatrix {
    if doubled {
        let values: Vec<C64> = f.values().iter().chain(f.values()).copied().collect();
        ComplexMatrix::from_diag(&values)
    } else {
        ComplexMatrix::from_diag(f.values())
    }
}

/// A nonzero Dirac entry with the lattice sites of its row and column.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct DiracEntry {
    pub row: usize,
    pub col: usize,
    pub value: C64,
    pub row_site: usize,
    pub col_site: usize,
}

#[derive(Clone, Debug)]
pub struct SpectralTriple {
    lattice: LatticeSpec,
    kind: DiracKind,
    dirac: ComplexMatrix,
    hilbert_dim: usize,
    grading: Option<ComplexMatrix>,
    selfadjoint: bool,
    entries: Vec<DiracEntry>,
}

pub fn build_triple(lattice: LatticeSpec, kind: DiracKind) -> Result<SpectralTriple> {
    if kind.topology() != lattice.topology() {
        return Err(Error::IncompatibleKind {
            kind: kind.to_string(),
            topology: lattice.topology().to_string(),
        });
    }
    let n = lattice.n_sites();
    let dirac = match kind {
        DiracKind::AdjacencyPlain => build_adjacency_block(n)?,
        DiracKind::AdjacencyDoubled => build_doubled_dirac(&build_adjacency_block(n)?)?,
        DiracKind::SymmetricDifference => build_symmetric_difference(n)?,
        DiracKind::ClosedAdjacencyDoubled => build_doubled_dirac(&build_closed_adjacency_block(n)?)?,
    };
    let grading = kind.is_doubled().then(|| build_grading(n));
    SpectralTriple::from_parts(lattice, kind, dirac, grading)
}

impl SpectralTriple {
    /// Assembles a triple from explicit parts. The Hilbert dimension follows
    /// from `kind`; the selfadjoint flag is measured, not assumed.
    pub fn from_parts(
        lattice: LatticeSpec,
        kind: DiracKind,
        dirac: ComplexMatrix,
        grading: Option<ComplexMatrix>,
    ) -> Result<Self> {
        let n = lattice.n_sites();
        let hilbert_dim = if kind.is_doubled() { 2 * n } else { n };
        if dirac.rows() != hilbert_dim || dirac.cols() != hilbert_dim {
            return Err(Error::DimensionMismatch(format!(
                "dirac is {}x{}, hilbert space has dimension {hilbert_dim}",
                dirac.rows(),
                dirac.cols()
            )));
        }
        if let Some(g) = &grading {
            if g.rows() != hilbert_dim || g.cols() != hilbert_dim {
                return Err(Error::DimensionMismatch("grading does not match hilbert space".into()));
            }
        }
        if !dirac.is_finite() {
            return Err(Error::NonFinite("dirac"));
        }
        let selfadjoint = dirac.hermitian_deviation() <= SELFADJOINT_TOL;
        let mut entries = Vec::new();
        for row in 0..hilbert_dim {
            for col in 0..hilbert_dim {
                let value = dirac[(row, col)];
                if value != C64::new(0.0, 0.0) {
                    entries.push(DiracEntry {
                        row,
                        col,
                        value,
                        row_site: row % n,
                        col_site: col % n,
                    });
                }
            }
        }
        Ok(SpectralTriple {
            lattice,
            kind,
            dirac,
            hilbert_dim,
            grading,
            selfadjoint,
            entries,
        })
    }

    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }

    pub fn n_sites(&self) -> usize {
        self.lattice.n_sites()
    }

    pub fn kind(&self) -> DiracKind {
        self.kind
    }

    pub fn dirac(&self) -> &ComplexMatrix {
        &self.dirac
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn grading(&self) -> Option<&ComplexMatrix> {
        self.grading.as_ref()
    }

    pub fn is_selfadjoint(&self) -> bool {
        self.selfadjoint
    }

    pub(crate) fn entries(&self) -> &[DiracEntry] {
        &self.entries
    }

    fn check_len(&self, f: &LatticeFunction) -> Result<()> {
        if f.len() != self.n_sites() {
            return Err(Error::LengthMismatch {
                expected: self.n_sites(),
                got: f.len(),
            });
        }
        Ok(())
    }

    /// `f̂` on this triple's Hilbert space.
    pub fn represent(&self, f: &LatticeFunction) -> Result<ComplexMatrix> {
        self.check_len(f)?;
        Ok(represent(f, self.kind.is_doubled()))
    }

    /// `[D, f̂]` by dense multiplication.
    pub fn commutator_with(&self, f: &LatticeFunction) -> Result<ComplexMatrix> {
        commutator(&self.dirac, &self.represent(f)?)
    }

    /// `[D, f̂]` for a real function, assembled entrywise from the nonzero
    /// Dirac entries: `[D, f̂]_{ab} = D_{ab} (f(b) − f(a))`.
    pub(crate) fn commutator_real(&self, f: &[f64]) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for e in &self.entries {
            m[(e.row, e.col)] = e.value * (f[e.col_site] - f[e.row_site]);
        }
        m
    }
}

/// `‖[D, f̂]‖`. Adjacency kinds use the closed form `max_k |f_{k+1} − f_k|`
/// (wrapping `N+1 → 1` on the cycle); the symmetric difference operator goes
/// through the spectral norm.
pub fn commutator_norm(t: &SpectralTriple, f: &LatticeFunction) -> Result<f64> {
    t.check_len(f)?;
    if !t.kind().is_adjacency() {
        return commutator_norm_generic(t, f);
    }
    let v = f.values();
    let n = v.len();
    let mut norm = v.windows(2).map(|w| (w[1] - w[0]).norm()).fold(0.0, f64::max);
    if t.lattice().topology() == Topology::Closed {
        norm = norm.max((v[0] - v[n - 1]).norm());
    }
    Ok(norm)
}

/// `‖[D, f̂]‖` as the spectral norm of the dense commutator.
pub fn commutator_norm_generic(t: &SpectralTriple, f: &LatticeFunction) -> Result<f64> {
    Ok(spectral_norm(&t.commutator_with(f)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Identity {
    /// `D = D†`
    SelfAdjoint,
    /// `γ² = 1`
    GradingInvolution,
    /// `γD = −Dγ`
    GradingAnticommutes,
    /// `γf̂ = f̂γ` for every sample
    GradingCommutesWithFunctions,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckStatus {
    Pass,
    Fail,
    /// The identity is deliberately not required for this kind.
    Skipped,
    /// No grading was built, so grading identities do not apply.
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub identity: Identity,
    pub status: CheckStatus,
    pub max_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub kind: DiracKind,
    pub tolerance: f64,
    pub checks: Vec<IdentityCheck>,
}

impl ValidationReport {
    /// No identity failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn check(&self, identity: Identity) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.identity == identity)
    }

    /// Worst deviation over the graded identities; skipped ones are ignored.
    pub fn max_deviation(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| matches!(c.status, CheckStatus::Pass | CheckStatus::Fail))
            .filter_map(|c| c.max_deviation)
            .fold(0.0, f64::max)
    }
}

fn graded(identity: Identity, deviation: f64, tol: f64) -> IdentityCheck {
    IdentityCheck {
        identity,
        status: if deviation <= tol { CheckStatus::Pass } else { CheckStatus::Fail },
        max_deviation: Some(deviation),
    }
}

/// Checks `D = D†`, `γ² = 1`, `γD = −Dγ` and `γf̂ = f̂γ` (for each sample)
/// by max-entry deviation.
pub fn validate_triple(t: &SpectralTriple, samples: &[LatticeFunction], tol: f64) -> Result<ValidationReport> {
    for f in samples {
        t.check_len(f)?;
    }
    let mut checks = Vec::with_capacity(4);
    let d = t.dirac();

    if t.kind() == DiracKind::AdjacencyPlain {
        checks.push(IdentityCheck {
            identity: Identity::SelfAdjoint,
            status: CheckStatus::Skipped,
            max_deviation: Some(d.hermitian_deviation()),
        });
    } else {
        checks.push(graded(Identity::SelfAdjoint, d.hermitian_deviation(), tol));
    }

    match t.grading() {
        None => {
            for identity in [
                Identity::GradingInvolution,
                Identity::GradingAnticommutes,
                Identity::GradingCommutesWithFunctions,
            ] {
                checks.push(IdentityCheck {
                    identity,
                    status: CheckStatus::NotApplicable,
                    max_deviation: None,
                });
            }
        }
        Some(g) => {
            let id = ComplexMatrix::identity(t.hilbert_dim());
            checks.push(graded(Identity::GradingInvolution, g.matmul(g)?.max_deviation(&id), tol));

            let anti = g.matmul(d)?.add(&d.matmul(g)?)?;
            checks.push(graded(Identity::GradingAnticommutes, anti.max_abs(), tol));

            let mut worst = 0.0f64;
            for f in samples {
                worst = worst.max(commutator(g, &t.represent(f)?)?.max_abs());
            }
            checks.push(graded(Identity::GradingCommutesWithFunctions, worst, tol));
        }
    }
    Ok(ValidationReport {
        kind: t.kind(),
        tolerance: tol,
        checks,
    })
}
