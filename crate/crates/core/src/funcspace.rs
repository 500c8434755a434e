//! Structured locally Lipschitz functions with exact subdifferential oracles.
//!
//! Every scalar function is built from smooth atoms combined by a pointwise
//! `max`, a pointwise `min`, or an outer `exp`. The exponential is pushed into
//! the atoms (`exp(max a_i) = max exp(a_i)`), so each function normalizes to
//! one of three shapes: a single smooth atom, a max of atoms, or a min of
//! atoms. For these shapes the limiting subdifferential has an exact finite
//! representation:
//!
//! * smooth: the gradient;
//! * max: the convex hull of the active gradients (the function is lower
//!   regular there, so the limiting and Clarke sets coincide);
//! * min: the discrete union of the active gradients, whose convex hull is the
//!   Clarke set.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Matrix};
use crate::minnorm;

/// Default tolerance for deciding which atoms attain the max/min.
pub const DEFAULT_ACTIVITY_TOL: f64 = 1e-9;

/// Two gradients closer than this (relative, sup-norm) are the same vector.
const MERGE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FuncError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("{0} needs at least one atom")]
    EmptyAtomList(&'static str),
    #[error("a vector function needs at least one component")]
    NoComponents,
    #[error("unsupported composition: {0}")]
    UnsupportedComposition(String),
    #[error("active min-atoms cross tangentially (equal gradients and Hessians)")]
    TangentialCrossing,
    #[error("degenerate min crossing: an active gradient lies in the hull of the others")]
    DegenerateCrossing,
    #[error("invalid atom: {0}")]
    InvalidAtom(String),
}

/// One monomial `coef * prod_j x_j^{powers[j]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub coef: f64,
    pub powers: Vec<u32>,
}

/// A smooth function `R^n -> R` with analytic gradient and Hessian.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SmoothAtom {
    /// `<coeffs, x> + constant`
    Affine {
        coeffs: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    /// `0.5 x^T Q x + <linear, x> + constant`
    Quadratic {
        matrix: Matrix,
        linear: Vec<f64>,
        #[serde(default)]
        constant: f64,
    },
    /// `scale * ||x - center||^2 + offset`
    NormSquaredShift {
        center: Vec<f64>,
        #[serde(default = "one")]
        scale: f64,
        #[serde(default)]
        offset: f64,
    },
    /// Sum of monomials in `dim` variables.
    CustomPolynomial { dim: usize, terms: Vec<Monomial> },
    /// `exp(inner(x))`
    ExpCompose { inner: Box<SmoothAtom> },
    /// Sum of atoms of equal dimension.
    Sum { atoms: Vec<SmoothAtom> },
}

fn one() -> f64 {
    1.0
}

impl SmoothAtom {
    pub fn affine(coeffs: Vec<f64>, constant: f64) -> Self {
        SmoothAtom::Affine { coeffs, constant }
    }

    /// The constant function `c` on `R^n`.
    pub fn constant(n: usize, c: f64) -> Self {
        SmoothAtom::Affine {
            coeffs: vec![0.0; n],
            constant: c,
        }
    }

    pub fn norm_sq_shift(center: Vec<f64>, scale: f64, offset: f64) -> Self {
        SmoothAtom::NormSquaredShift {
            center,
            scale,
            offset,
        }
    }

    pub fn quadratic(matrix: Matrix, linear: Vec<f64>, constant: f64) -> Self {
        SmoothAtom::Quadratic {
            matrix,
            linear,
            constant,
        }
    }

    pub fn polynomial(dim: usize, terms: Vec<(f64, Vec<u32>)>) -> Self {
        SmoothAtom::CustomPolynomial {
            dim,
            terms: terms
                .into_iter()
                .map(|(coef, powers)| Monomial { coef, powers })
                .collect(),
        }
    }

    pub fn exp(inner: SmoothAtom) -> Self {
        SmoothAtom::ExpCompose {
            inner: Box::new(inner),
        }
    }

    /// Expression tag used in problem files.
    pub fn descriptor(&self) -> &'static str {
        match self {
            SmoothAtom::Affine { .. } => "affine",
            SmoothAtom::Quadratic { .. } => "quadratic",
            SmoothAtom::NormSquaredShift { .. } => "norm-squared-shift",
            SmoothAtom::CustomPolynomial { .. } => "custom-polynomial",
            SmoothAtom::ExpCompose { .. } => "exp-compose",
            SmoothAtom::Sum { .. } => "sum",
        }
    }

    /// Checks internal consistency and returns the ambient dimension.
    pub fn validate(&self) -> Result<usize, FuncError> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            SmoothAtom::Affine { coeffs, constant } => {
                if !finite(coeffs) || !constant.is_finite() {
                    return Err(FuncError::InvalidAtom("non-finite affine data".into()));
                }
                Ok(coeffs.len())
            }
            SmoothAtom::Quadratic {
                matrix,
                linear,
                constant,
            } => {
                let n = matrix.len();
                if matrix.iter().any(|r| r.len() != n || !finite(r)) {
                    return Err(FuncError::InvalidAtom("quadratic matrix must be square".into()));
                }
                if linear.len() != n {
                    return Err(FuncError::DimensionMismatch {
                        expected: n,
                        got: linear.len(),
                    });
                }
                if !finite(linear) || !constant.is_finite() {
                    return Err(FuncError::InvalidAtom("non-finite quadratic data".into()));
                }
                Ok(n)
            }
            SmoothAtom::NormSquaredShift {
                center,
                scale,
                offset,
            } => {
                if !finite(center) || !scale.is_finite() || !offset.is_finite() {
                    return Err(FuncError::InvalidAtom("non-finite shift data".into()));
                }
                Ok(center.len())
            }
            SmoothAtom::CustomPolynomial { dim, terms } => {
                for t in terms {
                    if t.powers.len() != *dim {
                        return Err(FuncError::DimensionMismatch {
                            expected: *dim,
                            got: t.powers.len(),
                        });
                    }
                    if !t.coef.is_finite() {
                        return Err(FuncError::InvalidAtom("non-finite coefficient".into()));
                    }
                }
                Ok(*dim)
            }
            SmoothAtom::ExpCompose { inner } => inner.validate(),
            SmoothAtom::Sum { atoms } => {
                let first = atoms.first().ok_or(FuncError::EmptyAtomList("sum"))?;
                let n = first.validate()?;
                for a in &atoms[1..] {
                    let m = a.validate()?;
                    if m != n {
                        return Err(FuncError::DimensionMismatch {
                            expected: n,
                            got: m,
                        });
                    }
                }
                Ok(n)
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            SmoothAtom::Affine { coeffs, constant } => linalg::dot(coeffs, x) + constant,
            SmoothAtom::Quadratic {
                matrix,
                linear,
                constant,
            } => {
                let qx = linalg::mat_vec(matrix, x);
                0.5 * linalg::dot(x, &qx) + linalg::dot(linear, x) + constant
            }
            SmoothAtom::NormSquaredShift {
                center,
                scale,
                offset,
            } => {
                let d = linalg::dist(x, center);
                scale * d * d + offset
            }
            SmoothAtom::CustomPolynomial { terms, .. } => {
                terms.iter().map(|t| t.coef * monomial(&t.powers, x, None)).sum()
            }
            SmoothAtom::ExpCompose { inner } => inner.eval(x).exp(),
            SmoothAtom::Sum { atoms } => atoms.iter().map(|a| a.eval(x)).sum(),
        }
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        match self {
            SmoothAtom::Affine { coeffs, .. } => coeffs.clone(),
            SmoothAtom::Quadratic { matrix, linear, .. } => (0..n)
                .map(|i| {
                    let sym: f64 = (0..n).map(|j| 0.5 * (matrix[i][j] + matrix[j][i]) * x[j]).sum();
                    sym + linear[i]
                })
                .collect(),
            SmoothAtom::NormSquaredShift { center, scale, .. } => {
                linalg::scale(&linalg::sub(x, center), 2.0 * scale)
            }
            SmoothAtom::CustomPolynomial { terms, .. } => {
                let mut g = vec![0.0; n];
                for t in terms {
                    for (j, gj) in g.iter_mut().enumerate() {
                        if t.powers[j] > 0 {
                            *gj += t.coef * monomial(&t.powers, x, Some(j));
                        }
                    }
                }
                g
            }
            SmoothAtom::ExpCompose { inner } => {
                let e = inner.eval(x).exp();
                linalg::scale(&inner.grad(x), e)
            }
            SmoothAtom::Sum { atoms } => {
                let mut g = vec![0.0; n];
                for a in atoms {
                    linalg::axpy(&mut g, 1.0, &a.grad(x));
                }
                g
            }
        }
    }

    pub fn hessian(&self, x: &[f64]) -> Matrix {
        let n = x.len();
        match self {
            SmoothAtom::Affine { .. } => linalg::zeros(n),
            SmoothAtom::Quadratic { matrix, .. } => (0..n)
                .map(|i| (0..n).map(|j| 0.5 * (matrix[i][j] + matrix[j][i])).collect())
                .collect(),
            SmoothAtom::NormSquaredShift { scale, .. } => {
                let mut h = linalg::identity(n);
                for (i, row) in h.iter_mut().enumerate() {
                    row[i] = 2.0 * scale;
                }
                h
            }
            SmoothAtom::CustomPolynomial { terms, .. } => {
                let mut h = linalg::zeros(n);
                for t in terms {
                    for i in 0..n {
                        for j in 0..n {
                            h[i][j] += t.coef * monomial_second(&t.powers, x, i, j);
                        }
                    }
                }
                h
            }
            SmoothAtom::ExpCompose { inner } => {
                let e = inner.eval(x).exp();
                let g = inner.grad(x);
                let mut h = linalg::outer(&g, &g);
                linalg::mat_axpy(&mut h, 1.0, &inner.hessian(x));
                for row in h.iter_mut() {
                    for v in row.iter_mut() {
                        *v *= e;
                    }
                }
                h
            }
            SmoothAtom::Sum { atoms } => {
                let mut h = linalg::zeros(n);
                for a in atoms {
                    linalg::mat_axpy(&mut h, 1.0, &a.hessian(x));
                }
                h
            }
        }
    }

    fn plus(&self, other: &SmoothAtom) -> SmoothAtom {
        let mut atoms = match self {
            SmoothAtom::Sum { atoms } => atoms.clone(),
            a => vec![a.clone()],
        };
        match other {
            SmoothAtom::Sum { atoms: more } => atoms.extend(more.iter().cloned()),
            a => atoms.push(a.clone()),
        }
        SmoothAtom::Sum { atoms }
    }
}

/// `prod_j x_j^{p_j}`, optionally differentiated once in variable `d`.
fn monomial(powers: &[u32], x: &[f64], d: Option<usize>) -> f64 {
    let mut v = 1.0;
    for (j, (&p, &xj)) in powers.iter().zip(x).enumerate() {
        if Some(j) == d {
            v *= p as f64 * xj.powi(p as i32 - 1);
        } else {
            v *= xj.powi(p as i32);
        }
    }
    v
}

fn monomial_second(powers: &[u32], x: &[f64], a: usize, b: usize) -> f64 {
    let mut v = 1.0;
    for (j, (&p, &xj)) in powers.iter().zip(x).enumerate() {
        let k = (j == a) as u32 + (j == b) as u32;
        if k > p {
            return 0.0;
        }
        let coef = match k {
            0 => 1.0,
            1 => p as f64,
            _ => (p * (p - 1)) as f64,
        };
        v *= coef * xj.powi((p - k) as i32);
    }
    v
}

/// Structural kind of a scalar function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FunctionKind {
    Smooth { atom: SmoothAtom },
    MaxOf { atoms: Vec<SmoothAtom> },
    MinOf { atoms: Vec<SmoothAtom> },
    ExpOf { inner: Box<ScalarFunction> },
}

/// A locally Lipschitz scalar function from the structured grammar.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarFunction {
    #[serde(flatten)]
    pub kind: FunctionKind,
    /// Lipschitz constant on the problem box, when known.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lipschitz_bound: Option<f64>,
}

/// How the atoms of a normalized function are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combine {
    Smooth,
    Max,
    Min,
}

/// A scalar function with the exponential pushed into its atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub combine: Combine,
    pub atoms: Vec<SmoothAtom>,
}

impl ScalarFunction {
    pub fn smooth(atom: SmoothAtom) -> Self {
        Self::from_kind(FunctionKind::Smooth { atom })
    }

    pub fn max_of(atoms: Vec<SmoothAtom>) -> Self {
        Self::from_kind(FunctionKind::MaxOf { atoms })
    }

    pub fn min_of(atoms: Vec<SmoothAtom>) -> Self {
        Self::from_kind(FunctionKind::MinOf { atoms })
    }

    pub fn exp_of(inner: ScalarFunction) -> Self {
        Self::from_kind(FunctionKind::ExpOf {
            inner: Box::new(inner),
        })
    }

    fn from_kind(kind: FunctionKind) -> Self {
        ScalarFunction {
            kind,
            lipschitz_bound: None,
        }
    }

    pub fn with_lipschitz_bound(mut self, l: f64) -> Self {
        self.lipschitz_bound = Some(l);
        self
    }

    /// Checks the grammar invariants and returns the ambient dimension.
    pub fn validate(&self) -> Result<usize, FuncError> {
        let check_all = |atoms: &[SmoothAtom], what| -> Result<usize, FuncError> {
            let first = atoms.first().ok_or(FuncError::EmptyAtomList(what))?;
            let n = first.validate()?;
            for a in &atoms[1..] {
                let m = a.validate()?;
                if m != n {
                    return Err(FuncError::DimensionMismatch {
                        expected: n,
                        got: m,
                    });
                }
            }
            Ok(n)
        };
        match &self.kind {
            FunctionKind::Smooth { atom } => atom.validate(),
            FunctionKind::MaxOf { atoms } => check_all(atoms, "max-of"),
            FunctionKind::MinOf { atoms } => check_all(atoms, "min-of"),
            FunctionKind::ExpOf { inner } => inner.validate(),
        }
    }

    pub fn normalize(&self) -> Normalized {
        match &self.kind {
            FunctionKind::Smooth { atom } => Normalized {
                combine: Combine::Smooth,
                atoms: vec![atom.clone()],
            },
            FunctionKind::MaxOf { atoms } => Normalized {
                combine: Combine::Max,
                atoms: atoms.clone(),
            },
            FunctionKind::MinOf { atoms } => Normalized {
                combine: Combine::Min,
                atoms: atoms.clone(),
            },
            FunctionKind::ExpOf { inner } => {
                let mut nrm = inner.normalize();
                nrm.atoms = nrm.atoms.into_iter().map(SmoothAtom::exp).collect();
                nrm
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            FunctionKind::Smooth { atom } => atom.eval(x),
            FunctionKind::MaxOf { atoms } => atoms.iter().map(|a| a.eval(x)).fold(f64::NEG_INFINITY, f64::max),
            FunctionKind::MinOf { atoms } => atoms.iter().map(|a| a.eval(x)).fold(f64::INFINITY, f64::min),
            FunctionKind::ExpOf { inner } => inner.eval(x).exp(),
        }
    }

    /// `self + atom`, distributing the atom over every branch.
    pub fn add_smooth(&self, atom: &SmoothAtom) -> ScalarFunction {
        let nrm = self.normalize();
        let atoms = nrm.atoms.iter().map(|a| a.plus(atom)).collect();
        ScalarFunction::from_normalized(Normalized {
            combine: nrm.combine,
            atoms,
        })
    }

    /// `self + other` when the sum stays inside the grammar.
    ///
    /// max + max and min + min combine pairwise; a max added to a min has no
    /// finite representation here and is rejected.
    pub fn try_add(&self, other: &ScalarFunction) -> Result<ScalarFunction, FuncError> {
        let a = self.normalize();
        let b = other.normalize();
        match (a.combine, b.combine) {
            (Combine::Smooth, _) => Ok(other.add_smooth(&a.atoms[0])),
            (_, Combine::Smooth) => Ok(self.add_smooth(&b.atoms[0])),
            (ca, cb) if ca == cb => {
                let atoms = a
                    .atoms
                    .iter()
                    .flat_map(|x| b.atoms.iter().map(move |y| x.plus(y)))
                    .collect();
                Ok(ScalarFunction::from_normalized(Normalized { combine: ca, atoms }))
            }
            _ => Err(FuncError::UnsupportedComposition(
                "sum of a max-of and a min-of function".into(),
            )),
        }
    }

    pub fn from_normalized(n: Normalized) -> ScalarFunction {
        match n.combine {
            Combine::Smooth => ScalarFunction::smooth(n.atoms.into_iter().next().expect("one atom")),
            Combine::Max => ScalarFunction::max_of(n.atoms),
            Combine::Min => ScalarFunction::min_of(n.atoms),
        }
    }

    /// Exact limiting subdifferential at `x`.
    pub fn limiting_subdiff(&self, x: &[f64], activity_tol: f64) -> Result<SubdiffSet, FuncError> {
        self.normalize().limiting_subdiff(x, activity_tol)
    }

    pub fn clarke_subdiff(&self, x: &[f64], activity_tol: f64) -> Result<SubdiffSet, FuncError> {
        let lim = self.limiting_subdiff(x, activity_tol)?;
        Ok(SubdiffSet {
            pieces: vec![ConvexPiece {
                generators: dedupe(lim.all_generators()),
                hull: true,
            }],
        })
    }

    /// Regular (Fréchet) subdifferential; empty at concave kinks.
    pub fn frechet_subdiff(&self, x: &[f64], activity_tol: f64) -> SubdiffSet {
        self.normalize().frechet_subdiff(x, activity_tol)
    }
}

impl Normalized {
    pub fn values(&self, x: &[f64]) -> Vec<f64> {
        self.atoms.iter().map(|a| a.eval(x)).collect()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let vals = self.atoms.iter().map(|a| a.eval(x));
        match self.combine {
            Combine::Smooth => self.atoms[0].eval(x),
            Combine::Max => vals.fold(f64::NEG_INFINITY, f64::max),
            Combine::Min => vals.fold(f64::INFINITY, f64::min),
        }
    }

    /// Indices of atoms within `tol` of the extreme value.
    pub fn active(&self, x: &[f64], tol: f64) -> Vec<usize> {
        if self.combine == Combine::Smooth {
            return vec![0];
        }
        let vals = self.values(x);
        let target = self.reduce(&vals);
        vals.iter()
            .enumerate()
            .filter(|(_, v)| (*v - target).abs() <= tol)
            .map(|(i, _)| i)
            .collect()
    }

    fn reduce(&self, vals: &[f64]) -> f64 {
        match self.combine {
            Combine::Smooth => vals[0],
            Combine::Max => vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            Combine::Min => vals.iter().cloned().fold(f64::INFINITY, f64::min),
        }
    }

    /// Lowest-index active atom: the reproducible subgradient selection.
    pub fn selected(&self, x: &[f64], tol: f64) -> usize {
        self.active(x, tol)[0]
    }

    pub fn selected_grad(&self, x: &[f64], tol: f64) -> Vec<f64> {
        self.atoms[self.selected(x, tol)].grad(x)
    }

    pub fn limiting_subdiff(&self, x: &[f64], tol: f64) -> Result<SubdiffSet, FuncError> {
        let active = self.active(x, tol);
        let grads: Vec<Vec<f64>> = active.iter().map(|&i| self.atoms[i].grad(x)).collect();
        match self.combine {
            Combine::Smooth | Combine::Max => Ok(SubdiffSet {
                pieces: vec![ConvexPiece {
                    generators: dedupe(grads),
                    hull: true,
                }],
            }),
            Combine::Min => {
                // Equal gradients merge unless the atoms also share a Hessian,
                // in which case first-order data cannot decide the limit set.
                for a in 0..active.len() {
                    for b in a + 1..active.len() {
                        if same_vector(&grads[a], &grads[b]) {
                            let ha = self.atoms[active[a]].hessian(x);
                            let hb = self.atoms[active[b]].hessian(x);
                            let same_h = ha.iter().zip(&hb).all(|(ra, rb)| same_vector(ra, rb));
                            if same_h {
                                return Err(FuncError::TangentialCrossing);
                            }
                        }
                    }
                }
                let distinct = dedupe(grads);
                if distinct.len() >= 3 {
                    for (i, g) in distinct.iter().enumerate() {
                        let others: Vec<Vec<f64>> = distinct
                            .iter()
                            .enumerate()
                            .filter(|(j, _)| *j != i)
                            .map(|(_, v)| linalg::sub(v, g))
                            .collect();
                        let scale = 1.0 + linalg::norm(g);
                        if minnorm::min_norm_point(&others, &[]).norm <= 1e-12 * scale {
                            return Err(FuncError::DegenerateCrossing);
                        }
                    }
                }
                Ok(SubdiffSet {
                    pieces: distinct
                        .into_iter()
                        .map(|g| ConvexPiece {
                            generators: vec![g],
                            hull: false,
                        })
                        .collect(),
                })
            }
        }
    }

    pub fn frechet_subdiff(&self, x: &[f64], tol: f64) -> SubdiffSet {
        let active = self.active(x, tol);
        let grads = dedupe(active.iter().map(|&i| self.atoms[i].grad(x)).collect());
        match self.combine {
            Combine::Smooth | Combine::Max => SubdiffSet {
                pieces: vec![ConvexPiece {
                    generators: grads,
                    hull: true,
                }],
            },
            Combine::Min if grads.len() == 1 => SubdiffSet {
                pieces: vec![ConvexPiece {
                    generators: grads,
                    hull: true,
                }],
            },
            Combine::Min => SubdiffSet { pieces: vec![] },
        }
    }
}

fn same_vector(a: &[f64], b: &[f64]) -> bool {
    let scale = a.iter().chain(b).fold(1.0f64, |m, v| m.max(v.abs()));
    linalg::max_abs_diff(a, b) <= MERGE_TOL * scale
}

fn dedupe(vs: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for v in vs {
        if !out.iter().any(|u| same_vector(u, &v)) {
            out.push(v);
        }
    }
    out
}

/// A finitely generated piece: the hull of its generators, or the discrete
/// generator set itself.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvexPiece {
    pub generators: Vec<Vec<f64>>,
    pub hull: bool,
}

/// Union of pieces. An empty list is the empty set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubdiffSet {
    pub pieces: Vec<ConvexPiece>,
}

impl SubdiffSet {
    pub fn is_empty(&self) -> bool {
        self.pieces.iter().all(|p| p.generators.is_empty())
    }

    pub fn all_generators(&self) -> Vec<Vec<f64>> {
        self.pieces
            .iter()
            .flat_map(|p| p.generators.iter().cloned())
            .collect()
    }

    /// Splits discrete pieces into singletons so every returned piece is a
    /// convex hull.
    pub fn convex_pieces(&self) -> Vec<Vec<Vec<f64>>> {
        let mut out = Vec::new();
        for p in &self.pieces {
            if p.hull {
                if !p.generators.is_empty() {
                    out.push(p.generators.clone());
                }
            } else {
                out.extend(p.generators.iter().map(|g| vec![g.clone()]));
            }
        }
        out
    }

    /// Euclidean distance from `v` to the set (infinite when empty).
    pub fn distance_to(&self, v: &[f64]) -> f64 {
        self.convex_pieces()
            .iter()
            .map(|gens| {
                let shifted: Vec<Vec<f64>> = gens.iter().map(|g| linalg::sub(g, v)).collect();
                minnorm::min_norm_point(&shifted, &[]).norm
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Extreme points of the convex hull of all generators.
    pub fn hull_vertices(&self) -> Vec<Vec<f64>> {
        let gens = dedupe(self.all_generators());
        let mut out = Vec::new();
        for (i, g) in gens.iter().enumerate() {
            let others: Vec<Vec<f64>> = gens
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| linalg::sub(v, g))
                .collect();
            if others.is_empty() || minnorm::min_norm_point(&others, &[]).norm > 1e-12 * (1.0 + linalg::norm(g)) {
                out.push(g.clone());
            }
        }
        out
    }
}

/// `F = (f_1, ..., f_m)` on a common ambient space `R^n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ScalarFunction>", into = "Vec<ScalarFunction>")]
pub struct VectorFunction {
    components: Vec<ScalarFunction>,
    dim: usize,
}

impl TryFrom<Vec<ScalarFunction>> for VectorFunction {
    type Error = FuncError;

    fn try_from(components: Vec<ScalarFunction>) -> Result<Self, FuncError> {
        VectorFunction::new(components)
    }
}

impl From<VectorFunction> for Vec<ScalarFunction> {
    fn from(f: VectorFunction) -> Self {
        f.components
    }
}

impl VectorFunction {
    pub fn new(components: Vec<ScalarFunction>) -> Result<Self, FuncError> {
        let first = components.first().ok_or(FuncError::NoComponents)?;
        let dim = first.validate()?;
        for c in &components[1..] {
            let d = c.validate()?;
            if d != dim {
                return Err(FuncError::DimensionMismatch { expected: dim, got: d });
            }
        }
        Ok(VectorFunction { components, dim })
    }

    pub fn components(&self) -> &[ScalarFunction] {
        &self.components
    }

    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &[f64]) -> Result<Vec<f64>, FuncError> {
        if x.len() != self.dim {
            return Err(FuncError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(self.components.iter().map(|f| f.eval(x)).collect())
    }
}

/// Component-wise evaluation with a dimension check.
pub fn eval_vector(f: &VectorFunction, x: &[f64]) -> Result<Vec<f64>, FuncError> {
    f.eval(x)
}

pub fn limiting_subdiff(f: &ScalarFunction, x: &[f64], activity_tol: f64) -> Result<SubdiffSet, FuncError> {
    f.limiting_subdiff(x, activity_tol)
}

pub fn clarke_subdiff(f: &ScalarFunction, x: &[f64], activity_tol: f64) -> Result<SubdiffSet, FuncError> {
    f.clarke_subdiff(x, activity_tol)
}

/// `e^F = (e^{f_1}, ..., e^{f_m})`, same weak Pareto and critical points.
pub fn exp_transform(f: &VectorFunction) -> VectorFunction {
    VectorFunction {
        components: f.components.iter().cloned().map(ScalarFunction::exp_of).collect(),
        dim: f.dim,
    }
}

/// Lipschitz constant of `f` on the box `[lo, hi]`: the stored bound when
/// present, otherwise 1.5 times the largest sampled atom-gradient norm.
pub fn lipschitz_bound(f: &ScalarFunction, lo: &[f64], hi: &[f64], samples: usize) -> f64 {
    if let Some(l) = f.lipschitz_bound {
        return l;
    }
    let nrm = f.normalize();
    let mut rng = ChaCha8Rng::seed_from_u64(0x11b5);
    let mut best: f64 = 0.0;
    let mut probe = |x: &[f64]| {
        for a in &nrm.atoms {
            best = best.max(linalg::norm(&a.grad(x)));
        }
    };
    probe(lo);
    probe(hi);
    for _ in 0..samples {
        let x: Vec<f64> = lo.iter().zip(hi).map(|(l, h)| l + (h - l) * rng.random::<f64>()).collect();
        probe(&x);
    }
    1.5 * best.max(1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sq_shift(c: f64) -> SmoothAtom {
        SmoothAtom::norm_sq_shift(vec![c], 1.0, 0.0)
    }

    fn abs1() -> ScalarFunction {
        ScalarFunction::max_of(vec![SmoothAtom::affine(vec![1.0], 0.0), SmoothAtom::affine(vec![-1.0], 0.0)])
    }

    fn neg_abs1() -> ScalarFunction {
        ScalarFunction::min_of(vec![SmoothAtom::affine(vec![1.0], 0.0), SmoothAtom::affine(vec![-1.0], 0.0)])
    }

    #[test]
    fn eval_vector_examples() {
        let f = VectorFunction::new(vec![
            ScalarFunction::smooth(sq_shift(1.0)),
            ScalarFunction::smooth(sq_shift(-1.0)),
        ])
        .unwrap();
        assert_eq!(eval_vector(&f, &[0.0]).unwrap(), vec![1.0, 1.0]);
        let g = VectorFunction::new(vec![ScalarFunction::min_of(vec![sq_shift(1.0), sq_shift(-1.0)])]).unwrap();
        assert_eq!(eval_vector(&g, &[0.0]).unwrap(), vec![1.0]);
        let h = VectorFunction::new(vec![ScalarFunction::exp_of(ScalarFunction::smooth(
            SmoothAtom::norm_sq_shift(vec![0.0], 1.0, 0.0),
        ))])
        .unwrap();
        assert_eq!(eval_vector(&h, &[0.0]).unwrap(), vec![1.0]);
        assert!(matches!(
            eval_vector(&f, &[0.0, 1.0]),
            Err(FuncError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn abs_is_one_hull_piece() {
        let s = abs1().limiting_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).unwrap();
        assert_eq!(s.pieces.len(), 1);
        assert!(s.pieces[0].hull);
        assert_eq!(s.pieces[0].generators, vec![vec![1.0], vec![-1.0]]);
    }

    #[test]
    fn neg_abs_is_two_points() {
        let s = neg_abs1().limiting_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).unwrap();
        assert_eq!(s.pieces.len(), 2);
        assert!(s.pieces.iter().all(|p| !p.hull && p.generators.len() == 1));
        assert_eq!(s.all_generators(), vec![vec![1.0], vec![-1.0]]);
        assert!(neg_abs1().frechet_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).is_empty());
        assert!(!abs1().frechet_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).is_empty());
    }

    #[test]
    fn min_of_shifted_squares_at_crossing() {
        let f = ScalarFunction::min_of(vec![sq_shift(1.0), sq_shift(-1.0)]);
        let s = f.limiting_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).unwrap();
        assert_eq!(s.all_generators(), vec![vec![-2.0], vec![2.0]]);
        let c = f.clarke_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).unwrap();
        assert_eq!(c.pieces.len(), 1);
        assert!(c.pieces[0].hull);
        assert!(c.distance_to(&[0.0]) < 1e-14);
        assert!((s.distance_to(&[0.0]) - 2.0).abs() < 1e-14);
    }

    #[test]
    fn clarke_of_smooth_is_gradient() {
        let f = ScalarFunction::smooth(SmoothAtom::norm_sq_shift(vec![0.0], 1.0, 0.0));
        let c = f.clarke_subdiff(&[3.0], DEFAULT_ACTIVITY_TOL).unwrap();
        assert_eq!(c.all_generators(), vec![vec![6.0]]);
    }

    #[test]
    fn exp_transform_chain_rule() {
        let f = VectorFunction::new(vec![neg_abs1()]).unwrap();
        let e = exp_transform(&f);
        assert_eq!(e.eval(&[0.0]).unwrap(), vec![1.0]);
        let s = e.components()[0].limiting_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).unwrap();
        assert_eq!(s.all_generators(), vec![vec![1.0], vec![-1.0]]);
        let id = VectorFunction::new(vec![ScalarFunction::smooth(SmoothAtom::affine(vec![1.0], 0.0))]).unwrap();
        assert_eq!(exp_transform(&id).eval(&[0.0]).unwrap(), vec![1.0]);
    }

    #[test]
    fn tangential_min_crossing_is_flagged() {
        let f = ScalarFunction::min_of(vec![sq_shift(0.0), sq_shift(0.0)]);
        assert_eq!(
            f.limiting_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL),
            Err(FuncError::TangentialCrossing)
        );
        // equal gradients, different curvature: merged
        let g = ScalarFunction::min_of(vec![sq_shift(0.0), SmoothAtom::norm_sq_shift(vec![0.0], 2.0, 0.0)]);
        let s = g.limiting_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL).unwrap();
        assert_eq!(s.all_generators(), vec![vec![0.0]]);
    }

    #[test]
    fn three_way_min_with_interior_gradient_is_flagged() {
        let f = ScalarFunction::min_of(vec![
            SmoothAtom::affine(vec![1.0], 0.0),
            SmoothAtom::affine(vec![-1.0], 0.0),
            SmoothAtom::constant(1, 0.0),
        ]);
        assert_eq!(
            f.limiting_subdiff(&[0.0], DEFAULT_ACTIVITY_TOL),
            Err(FuncError::DegenerateCrossing)
        );
    }

    #[test]
    fn empty_atom_lists_rejected() {
        assert_eq!(
            ScalarFunction::max_of(vec![]).validate(),
            Err(FuncError::EmptyAtomList("max-of"))
        );
        assert_eq!(VectorFunction::new(vec![]), Err(FuncError::NoComponents));
    }

    #[test]
    fn max_plus_min_is_unsupported() {
        let r = abs1().try_add(&neg_abs1());
        assert!(matches!(r, Err(FuncError::UnsupportedComposition(_))));
        let ok = abs1().try_add(&abs1()).unwrap();
        assert_eq!(ok.eval(&[-2.0]), 4.0);
    }

    #[test]
    fn add_smooth_distributes() {
        let f = neg_abs1().add_smooth(&SmoothAtom::constant(1, 3.0));
        assert_eq!(f.eval(&[1.0]), 2.0);
        let e = ScalarFunction::exp_of(abs1()).add_smooth(&SmoothAtom::constant(1, -1.0));
        assert!((e.eval(&[0.0]) - 0.0).abs() < 1e-15);
    }

    #[test]
    fn polynomial_derivatives() {
        // x^2 y + 3 y^3
        let p = SmoothAtom::polynomial(2, vec![(1.0, vec![2, 1]), (3.0, vec![0, 3])]);
        let x = [2.0, -1.0];
        assert_eq!(p.eval(&x), -4.0 - 3.0);
        assert_eq!(p.grad(&x), vec![2.0 * 2.0 * -1.0, 4.0 + 9.0]);
        assert_eq!(p.hessian(&x), vec![vec![-2.0, 4.0], vec![4.0, 18.0 * -1.0]]);
    }

    #[test]
    fn serde_shape() {
        let f = ScalarFunction::min_of(vec![sq_shift(1.0), SmoothAtom::affine(vec![2.0], 1.0)]).with_lipschitz_bound(4.0);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.contains("\"kind\":\"min-of\""));
        assert!(s.contains("\"kind\":\"norm-squared-shift\""));
        let back: ScalarFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let bad: Result<VectorFunction, _> = serde_json::from_str("[]");
        assert!(bad.is_err());
    }

    #[test]
    fn lipschitz_estimate_uses_stored_bound() {
        let f = abs1();
        assert!((lipschitz_bound(&f, &[-1.0], &[1.0], 16) - 1.5).abs() < 1e-12);
        assert_eq!(lipschitz_bound(&f.clone().with_lipschitz_bound(7.0), &[-1.0], &[1.0], 16), 7.0);
    }
}
