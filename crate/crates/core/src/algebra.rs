//! Finite commutative F_p-algebras, finite modules over them, and the
//! linear-algebra operations everything else reduces to.
//!
//! An algebra is a structure-constant table over F_p, validated to be
//! associative, commutative and unital by exhaustive basis enumeration.
//! Modules are action matrices; maps are plain F_p matrices checked for
//! (semi)linearity.

use std::sync::Arc;

use crate::error::{Caps, Error, Result, ValidationReport};
use crate::fp::{self, Matrix};

pub type AlgebraRef = Arc<FinAlgebra>;

#[derive(Debug, Clone)]
pub struct FinAlgebra {
    p: u32,
    dim: usize,
    labels: Vec<String>,
    /// table[(i*dim + j)*dim + k] = coefficient of b_k in b_i * b_j.
    table: Vec<u32>,
    unit: Vec<u32>,
}

/// Labels are presentation metadata; algebra identity is structural.
impl PartialEq for FinAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p
            && self.dim == other.dim
            && self.table == other.table
            && self.unit == other.unit
    }
}

impl Eq for FinAlgebra {}

impl FinAlgebra {
    pub fn new(
        p: u32,
        dim: usize,
        labels: Vec<String>,
        table: Vec<u32>,
        unit: Vec<u32>,
        caps: &Caps,
    ) -> Result<Self> {
        fp::check_prime(p, caps.max_p)?;
        if dim > caps.max_dim {
            return Err(Error::SizeCap {
                what: "algebra dimension",
                limit: caps.max_dim,
                actual: dim,
            });
        }
        if labels.len() != dim || table.len() != dim * dim * dim || unit.len() != dim {
            return Err(Error::Shape(format!(
                "algebra data sizes do not match dim {dim}"
            )));
        }
        let a = FinAlgebra {
            p,
            dim,
            labels,
            table: table.into_iter().map(|v| v % p).collect(),
            unit: unit.into_iter().map(|v| v % p).collect(),
        };
        a.validate().into_result()?;
        Ok(a)
    }

    /// The zero algebra (dim 0). Legal output of localization; flagged.
    pub fn zero_algebra(p: u32) -> Self {
        FinAlgebra {
            p,
            dim: 0,
            labels: vec![],
            table: vec![],
            unit: vec![],
        }
    }

    pub fn is_zero_algebra(&self) -> bool {
        self.dim == 0
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn unit(&self) -> &[u32] {
        &self.unit
    }

    pub fn zero_vec(&self) -> Vec<u32> {
        vec![0; self.dim]
    }

    pub fn basis_vec(&self, i: usize) -> Vec<u32> {
        let mut v = vec![0; self.dim];
        v[i] = 1;
        v
    }

    /// b_i * b_j in coordinates.
    fn basis_mul(&self, i: usize, j: usize) -> Vec<u32> {
        let d = self.dim;
        self.table[(i * d + j) * d..(i * d + j + 1) * d].to_vec()
    }

    pub fn mul(&self, x: &[u32], y: &[u32]) -> Vec<u32> {
        let d = self.dim;
        let mut out = vec![0u64; d];
        for i in 0..d {
            if x[i] == 0 {
                continue;
            }
            for j in 0..d {
                if y[j] == 0 {
                    continue;
                }
                let c = (x[i] as u64) * (y[j] as u64) % self.p as u64;
                for k in 0..d {
                    out[k] += c * self.table[(i * d + j) * d + k] as u64;
                }
            }
        }
        out.iter().map(|&v| (v % self.p as u64) as u32).collect()
    }

    pub fn pow(&self, x: &[u32], n: u32) -> Vec<u32> {
        let mut acc = self.unit.clone();
        for _ in 0..n {
            acc = self.mul(&acc, x);
        }
        acc
    }

    /// Matrix of left multiplication by x.
    pub fn left_mul_matrix(&self, x: &[u32]) -> Matrix {
        let cols = (0..self.dim)
            .map(|j| self.mul(x, &self.basis_vec(j)))
            .collect();
        Matrix::from_cols(self.p, self.dim, cols)
    }

    pub fn is_idempotent(&self, x: &[u32]) -> bool {
        self.mul(x, x) == x
    }

    pub fn is_nilpotent(&self, x: &[u32]) -> bool {
        // x nilpotent  =>  x^dim = 0 (strictly descending ideal chain).
        fp::vec_is_zero(&self.pow(x, self.dim as u32))
    }

    pub fn is_unit_element(&self, x: &[u32]) -> bool {
        self.left_mul_matrix(x).is_invertible()
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        if !fp::is_prime(self.p) {
            rep.push(format!("{} is not prime", self.p));
            return rep;
        }
        if self.dim == 0 {
            return rep; // zero algebra, vacuously fine
        }
        if fp::vec_is_zero(&self.unit) {
            rep.push("unit is zero in a nonzero algebra".to_string());
        }
        for i in 0..self.dim {
            let bi = self.basis_vec(i);
            if self.mul(&self.unit, &bi) != bi {
                rep.push(format!("unit fails on basis {i}"));
            }
            for j in 0..self.dim {
                let bj = self.basis_vec(j);
                if self.basis_mul(i, j) != self.basis_mul(j, i) {
                    rep.push(format!("commutativity fails on ({i},{j})"));
                }
                for k in 0..self.dim {
                    let bk = self.basis_vec(k);
                    let lhs = self.mul(&self.basis_mul(i, j), &bk);
                    let rhs = self.mul(&bi, &self.mul(&bj, &bk));
                    if lhs != rhs {
                        rep.push(format!("associativity fails on ({i},{j},{k})"));
                    }
                }
            }
        }
        rep
    }

    /// `F_p[x]/(f)` with the power basis, for monic f of degree >= 1.
    /// Coefficients are listed low degree first, including the leading 1.
    pub fn from_poly(p: u32, coeffs: &[u32], caps: &Caps) -> Result<Self> {
        fp::check_prime(p, caps.max_p)?;
        let coeffs: Vec<u32> = coeffs.iter().map(|c| c % p).collect();
        let deg = coeffs.len().saturating_sub(1);
        if deg == 0 || coeffs.last() != Some(&1) {
            return Err(Error::BadPolynomial);
        }
        // reduction of x^deg: x^deg = -(c_0 + c_1 x + ... + c_{deg-1} x^{deg-1})
        let reduction: Vec<u32> = coeffs[..deg].iter().map(|&c| fp::neg_mod(c, p)).collect();
        // powers[k] = coordinates of x^k for k in 0..2*deg-1
        let mut powers: Vec<Vec<u32>> = Vec::new();
        let mut cur = vec![0u32; deg];
        cur[0] = 1;
        powers.push(cur.clone());
        for _ in 1..(2 * deg) {
            // multiply by x: shift, then reduce the overflow
            let carry = cur[deg - 1];
            let mut next = vec![0u32; deg];
            for i in (1..deg).rev() {
                next[i] = cur[i - 1];
            }
            next[0] = 0;
            if carry != 0 {
                for i in 0..deg {
                    next[i] = (next[i] + carry * reduction[i]) % p;
                }
            }
            powers.push(next.clone());
            cur = next;
        }
        let mut table = vec![0u32; deg * deg * deg];
        for i in 0..deg {
            for j in 0..deg {
                let prod = &powers[i + j];
                for k in 0..deg {
                    table[(i * deg + j) * deg + k] = prod[k];
                }
            }
        }
        let labels = (0..deg)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => "x".to_string(),
                _ => format!("x^{i}"),
            })
            .collect();
        let mut unit = vec![0u32; deg];
        unit[0] = 1;
        FinAlgebra::new(p, deg, labels, table, unit, caps)
    }

    /// Product algebra A x B with the two unital projections.
    pub fn product(a: &AlgebraRef, b: &AlgebraRef, caps: &Caps) -> Result<(AlgebraRef, AlgebraMap, AlgebraMap)> {
        if a.p != b.p {
            return Err(Error::CharMismatch(a.p, b.p));
        }
        let p = a.p;
        let dim = a.dim + b.dim;
        let mut table = vec![0u32; dim * dim * dim];
        for i in 0..a.dim {
            for j in 0..a.dim {
                for k in 0..a.dim {
                    table[(i * dim + j) * dim + k] = a.table[(i * a.dim + j) * a.dim + k];
                }
            }
        }
        for i in 0..b.dim {
            for j in 0..b.dim {
                for k in 0..b.dim {
                    table[((a.dim + i) * dim + (a.dim + j)) * dim + (a.dim + k)] =
                        b.table[(i * b.dim + j) * b.dim + k];
                }
            }
        }
        let mut unit = vec![0u32; dim];
        unit[..a.dim].copy_from_slice(&a.unit);
        unit[a.dim..].copy_from_slice(&b.unit);
        let mut labels: Vec<String> = a.labels.iter().map(|l| format!("l.{l}")).collect();
        labels.extend(b.labels.iter().map(|l| format!("r.{l}")));
        let prod = Arc::new(FinAlgebra::new(p, dim, labels, table, unit, caps)?);
        let mut pa = Matrix::zeros(p, a.dim, dim);
        for i in 0..a.dim {
            pa.set(i, i, 1);
        }
        let mut pb = Matrix::zeros(p, b.dim, dim);
        for i in 0..b.dim {
            pb.set(i, a.dim + i, 1);
        }
        let proj_a = AlgebraMap::new(prod.clone(), a.clone(), pa)?;
        let proj_b = AlgebraMap::new(prod.clone(), b.clone(), pb)?;
        Ok((prod, proj_a, proj_b))
    }

    /// Frobenius x -> x^p as an F_p-linear matrix.
    pub fn frobenius_matrix(&self) -> Matrix {
        let cols = (0..self.dim)
            .map(|i| self.pow(&self.basis_vec(i), self.p))
            .collect();
        Matrix::from_cols(self.p, self.dim, cols)
    }

    /// Basis of the nilradical, computed as the kernel of a Frobenius
    /// iterate x -> x^(p^k) with p^k >= dim (an F_p-linear map in char p).
    pub fn nilradical(&self) -> Matrix {
        if self.dim == 0 {
            return Matrix::zeros(self.p, 0, 0);
        }
        let mut power = Matrix::identity(self.p, self.dim);
        let frob = self.frobenius_matrix();
        let mut pk = 1usize;
        while pk < self.dim {
            power = frob.mul(&power);
            pk *= self.p as usize;
        }
        power.kernel()
    }

    pub fn element_count(&self) -> u128 {
        (self.p as u128).pow(self.dim as u32)
    }

    fn check_enumeration_cap(&self, caps: &Caps) -> Result<()> {
        if self.element_count() > caps.max_enumeration as u128 {
            return Err(Error::SizeCap {
                what: "element enumeration",
                limit: caps.max_enumeration,
                actual: self.element_count().min(usize::MAX as u128) as usize,
            });
        }
        Ok(())
    }

    /// All idempotents, by brute force over the (capped) element set.
    pub fn idempotents(&self, caps: &Caps) -> Result<Vec<Vec<u32>>> {
        self.check_enumeration_cap(caps)?;
        Ok(fp::all_vectors(self.p, self.dim)
            .filter(|x| self.is_idempotent(x))
            .collect())
    }

    /// Primitive idempotents: nonzero e whose only sub-idempotents
    /// (f with fe = f) are 0 and e.
    pub fn primitive_idempotents(&self, caps: &Caps) -> Result<Vec<Vec<u32>>> {
        let idems = self.idempotents(caps)?;
        Ok(idems
            .iter()
            .filter(|e| {
                !fp::vec_is_zero(e)
                    && idems.iter().all(|f| {
                        let fe = self.mul(f, e);
                        fe != **f || fp::vec_is_zero(f) || *f == **e
                    })
            })
            .cloned()
            .collect())
    }

    /// The subalgebra structure on a (multiplicatively closed, unital)
    /// subspace. `basis` columns span the subspace; `unit` is the unit of
    /// the subalgebra in ambient coordinates. Returns the algebra
    /// together with the ambient inclusion matrix.
    pub fn subalgebra(&self, basis: &Matrix, unit_ambient: &[u32], caps: &Caps) -> Result<(AlgebraRef, Matrix)> {
        let d = basis.cols();
        if d == 0 {
            return Ok((Arc::new(FinAlgebra::zero_algebra(self.p)), basis.clone()));
        }
        let mut table = vec![0u32; d * d * d];
        for i in 0..d {
            for j in 0..d {
                let prod = self.mul(&basis.column(i), &basis.column(j));
                let c = basis.coords_of(&prod).ok_or_else(|| {
                    Error::Invariant("subspace not closed under multiplication".into())
                })?;
                for k in 0..d {
                    table[(i * d + j) * d + k] = c[k];
                }
            }
        }
        let unit = basis
            .coords_of(unit_ambient)
            .ok_or_else(|| Error::Invariant("unit not in subspace".into()))?;
        let labels = (0..d).map(|i| format!("e{i}")).collect();
        let alg = FinAlgebra::new(self.p, d, labels, table, unit, caps)?;
        Ok((Arc::new(alg), basis.clone()))
    }

    /// Localization at f: the power sequence of ideals f^k A stabilizes;
    /// the stable ideal is generated by an idempotent e, and A_f = eA
    /// with structure map a -> ea. Returns the localized algebra and the
    /// structure map. May return the zero algebra (f nilpotent).
    pub fn localize(self: &AlgebraRef, f: &[u32], caps: &Caps) -> Result<(AlgebraRef, AlgebraMap)> {
        let p = self.p;
        if self.dim == 0 {
            let z = Arc::new(FinAlgebra::zero_algebra(p));
            let m = Matrix::zeros(p, 0, 0);
            return Ok((z.clone(), AlgebraMap::new(self.clone(), z, m)?));
        }
        let mf = self.left_mul_matrix(f);
        // stabilize image of mf^k
        let mut power = mf.clone();
        let mut image = power.image_basis();
        loop {
            let next_power = mf.mul(&power);
            let next_image = next_power.image_basis();
            if next_image.rank() == image.rank() {
                break;
            }
            power = next_power;
            image = next_image;
        }
        let d = image.cols();
        if d == 0 {
            let z = Arc::new(FinAlgebra::zero_algebra(p));
            let m = Matrix::zeros(p, 0, self.dim);
            return Ok((z.clone(), AlgebraMap::new(self.clone(), z, m)?));
        }
        // solve for the idempotent e in I acting as identity on I
        // unknowns: coords c with e = image * c ; equations: e * g_j = g_j
        let n = self.dim;
        let mut rows: Vec<Vec<u32>> = Vec::new();
        let mut rhs: Vec<u32> = Vec::new();
        for j in 0..d {
            let g = image.column(j);
            let mg = self.left_mul_matrix(&g);
            // (image * c) * g_j = g_j  =>  mg * image * c = g_j
            let sys = mg.mul(&image);
            for r in 0..n {
                rows.push(sys.row(r).to_vec());
                rhs.push(g[r]);
            }
        }
        let sys = Matrix::from_rows(p, rows);
        let c = sys
            .solve(&rhs)
            .ok_or_else(|| Error::Internal("stable ideal has no identity element".into()))?;
        let e = image.apply(&c);
        debug_assert!(self.is_idempotent(&e));
        let (loc, incl) = self.subalgebra(&image, &e, caps)?;
        // structure map a -> ea in localized coordinates
        let me = self.left_mul_matrix(&e);
        let ambient = me; // n x n
        let coords = incl
            .solve_matrix(&ambient)
            .ok_or_else(|| Error::Internal("e*A not contained in stable ideal".into()))?;
        let map = AlgebraMap::new(self.clone(), loc.clone(), coords)?;
        Ok((loc, map))
    }
}

/// A unital multiplicative map of algebras over the same prime field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlgebraMap {
    source: AlgebraRef,
    target: AlgebraRef,
    matrix: Matrix,
}

impl AlgebraMap {
    pub fn new(source: AlgebraRef, target: AlgebraRef, matrix: Matrix) -> Result<Self> {
        if source.p != target.p {
            return Err(Error::CharMismatch(source.p, target.p));
        }
        if matrix.rows() != target.dim || matrix.cols() != source.dim {
            return Err(Error::Shape(format!(
                "algebra map matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                target.dim,
                source.dim
            )));
        }
        let m = AlgebraMap {
            source,
            target,
            matrix,
        };
        m.validate().into_result()?;
        Ok(m)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        if self.target.dim > 0 || self.source.dim == 0 {
            if self.apply(self.source.unit()) != self.target.unit {
                rep.push("algebra map does not preserve the unit".to_string());
            }
        } else {
            // nonzero target of dim 0 is impossible; dim-0 target is fine
        }
        for i in 0..self.source.dim {
            for j in 0..self.source.dim {
                let lhs = self.apply(&self.source.basis_mul(i, j));
                let rhs = self
                    .target
                    .mul(&self.apply(&self.source.basis_vec(i)), &self.apply(&self.source.basis_vec(j)));
                if lhs != rhs {
                    rep.push(format!("multiplicativity fails on basis pair ({i},{j})"));
                }
            }
        }
        rep
    }

    pub fn identity(a: &AlgebraRef) -> Self {
        AlgebraMap {
            source: a.clone(),
            target: a.clone(),
            matrix: Matrix::identity(a.p, a.dim),
        }
    }

    pub fn source(&self) -> &AlgebraRef {
        &self.source
    }
    pub fn target(&self) -> &AlgebraRef {
        &self.target
    }
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[u32]) -> Vec<u32> {
        self.matrix.apply(x)
    }

    /// self o other.
    pub fn compose(&self, other: &AlgebraMap) -> Result<AlgebraMap> {
        if other.target != self.source {
            return Err(Error::BaseMismatch("algebras in map composition"));
        }
        Ok(AlgebraMap {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&other.matrix),
        })
    }
}

/// A finite module over a finite algebra: an F_p-space with one action
/// matrix per algebra basis element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinModule {
    algebra: AlgebraRef,
    dim: usize,
    action: Vec<Matrix>,
}

impl FinModule {
    pub fn new(algebra: AlgebraRef, dim: usize, action: Vec<Matrix>) -> Result<Self> {
        if action.len() != algebra.dim() {
            return Err(Error::Shape(format!(
                "expected {} action matrices, got {}",
                algebra.dim(),
                action.len()
            )));
        }
        for m in &action {
            if m.rows() != dim || m.cols() != dim || m.p() != algebra.p() {
                return Err(Error::Shape("action matrix shape mismatch".into()));
            }
        }
        let module = FinModule {
            algebra,
            dim,
            action,
        };
        module.validate().into_result()?;
        Ok(module)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let a = &self.algebra;
        if a.dim() == 0 {
            if self.dim != 0 {
                rep.push("nonzero module over the zero algebra");
            }
            return rep;
        }
        let unit_act = self.act(a.unit());
        if unit_act != Matrix::identity(a.p(), self.dim) {
            rep.push("unit does not act as identity");
        }
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                let lhs = self.action[i].mul(&self.action[j]);
                let rhs = self.act(&a.basis_mul(i, j));
                if lhs != rhs {
                    rep.push(format!("action not multiplicative on basis pair ({i},{j})"));
                }
            }
        }
        rep
    }

    pub fn algebra(&self) -> &AlgebraRef {
        &self.algebra
    }
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Action matrix of an arbitrary element.
    pub fn act(&self, a: &[u32]) -> Matrix {
        let p = self.algebra.p();
        let mut m = Matrix::zeros(p, self.dim, self.dim);
        for (i, &c) in a.iter().enumerate() {
            if c != 0 {
                m = m.add(&self.action[i].scale(c));
            }
        }
        m
    }

    pub fn zero(algebra: AlgebraRef) -> Self {
        let n = algebra.dim();
        let p = algebra.p();
        FinModule {
            algebra,
            dim: 0,
            action: vec![Matrix::zeros(p, 0, 0); n],
        }
    }

    /// Free module A^rank with block left-multiplication action.
    pub fn free(algebra: AlgebraRef, rank: usize) -> Self {
        let d = algebra.dim();
        let p = algebra.p();
        let dim = d * rank;
        let mut action = Vec::with_capacity(d);
        for i in 0..d {
            let blk = algebra.left_mul_matrix(&algebra.basis_vec(i));
            let mut m = Matrix::zeros(p, dim, dim);
            for r in 0..rank {
                m.put_block(r * d, r * d, &blk);
            }
            action.push(m);
        }
        FinModule {
            algebra,
            dim,
            action,
        }
    }

    /// View the target of an algebra map as a module over the source.
    pub fn restriction_of_scalars(phi: &AlgebraMap) -> Self {
        let b = phi.target();
        let a = phi.source();
        let action = (0..a.dim())
            .map(|i| b.left_mul_matrix(&phi.apply(&a.basis_vec(i))))
            .collect();
        FinModule {
            algebra: a.clone(),
            dim: b.dim(),
            action,
        }
    }

    /// Module structure on an action-invariant subspace (columns of
    /// `basis` must be linearly independent). Errors if not invariant.
    pub fn on_invariant_subspace(&self, basis: &Matrix) -> Result<(FinModule, Matrix)> {
        let mut action = Vec::with_capacity(self.algebra.dim());
        for m in &self.action {
            let moved = m.mul(basis);
            let inner = basis
                .solve_matrix(&moved)
                .ok_or_else(|| Error::Invariant("subspace not action-invariant".into()))?;
            action.push(inner);
        }
        let module = FinModule {
            algebra: self.algebra.clone(),
            dim: basis.cols(),
            action,
        };
        Ok((module, basis.clone()))
    }

    /// Quotient module by the span of `span` columns, with projection and
    /// a chosen section.
    pub fn quotient_by(&self, span: &Matrix) -> (FinModule, Matrix, Matrix) {
        let p = self.algebra.p();
        let q = fp::quotient_by_span(p, self.dim, span);
        let action = self
            .action
            .iter()
            .map(|m| q.proj.mul(&m.mul(&q.section)))
            .collect();
        let module = FinModule {
            algebra: self.algebra.clone(),
            dim: q.dim,
            action,
        };
        (module, q.proj, q.section)
    }
}

/// An F_p-linear map between finite modules; linearity over the algebra
/// (or semilinearity over an algebra map) is a checked property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleMap {
    source: FinModule,
    target: FinModule,
    matrix: Matrix,
}

impl ModuleMap {
    /// A-linear map between modules over the same algebra.
    pub fn linear(source: FinModule, target: FinModule, matrix: Matrix) -> Result<Self> {
        if source.algebra != target.algebra {
            return Err(Error::BaseMismatch("module owner algebras"));
        }
        let m = ModuleMap {
            source,
            target,
            matrix,
        };
        m.validate_linear().into_result()?;
        Ok(m)
    }

    /// Map semilinear over phi: matrix . act_src(a) = act_tgt(phi(a)) . matrix.
    pub fn semilinear(
        phi: &AlgebraMap,
        source: FinModule,
        target: FinModule,
        matrix: Matrix,
    ) -> Result<Self> {
        if &source.algebra != phi.source() || &target.algebra != phi.target() {
            return Err(Error::BaseMismatch("module algebras for semilinear map"));
        }
        let m = ModuleMap {
            source,
            target,
            matrix,
        };
        m.validate_semilinear(phi).into_result()?;
        Ok(m)
    }

    pub fn validate_linear(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        if self.matrix.rows() != self.target.dim || self.matrix.cols() != self.source.dim {
            rep.push("module map matrix shape mismatch");
            return rep;
        }
        for i in 0..self.source.algebra.dim() {
            let lhs = self.matrix.mul(&self.source.action[i]);
            let rhs = self.target.action[i].mul(&self.matrix);
            if lhs != rhs {
                rep.push(format!("equivariance fails on algebra basis {i}"));
            }
        }
        rep
    }

    pub fn validate_semilinear(&self, phi: &AlgebraMap) -> ValidationReport {
        let mut rep = ValidationReport::default();
        if self.matrix.rows() != self.target.dim || self.matrix.cols() != self.source.dim {
            rep.push("module map matrix shape mismatch");
            return rep;
        }
        for i in 0..self.source.algebra.dim() {
            let a = self.source.algebra.basis_vec(i);
            let lhs = self.matrix.mul(&self.source.action[i]);
            let rhs = self.target.act(&phi.apply(&a)).mul(&self.matrix);
            if lhs != rhs {
                rep.push(format!("semilinearity fails on algebra basis {i}"));
            }
        }
        rep
    }

    pub fn identity(m: &FinModule) -> Self {
        ModuleMap {
            source: m.clone(),
            target: m.clone(),
            matrix: Matrix::identity(m.algebra.p(), m.dim),
        }
    }

    pub fn source(&self) -> &FinModule {
        &self.source
    }
    pub fn target(&self) -> &FinModule {
        &self.target
    }
    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn compose(&self, other: &ModuleMap) -> Result<ModuleMap> {
        if other.target != self.source {
            return Err(Error::BaseMismatch("modules in map composition"));
        }
        Ok(ModuleMap {
            source: other.source.clone(),
            target: self.target.clone(),
            matrix: self.matrix.mul(&other.matrix),
        })
    }

    pub fn is_surjective(&self) -> bool {
        self.matrix.rank() == self.target.dim
    }

    pub fn is_injective(&self) -> bool {
        self.matrix.kernel().cols() == 0
    }
}

/// Kernel, image and cokernel of an A-linear module map, with the
/// connecting maps and induced actions.
#[derive(Debug, Clone)]
pub struct SubquotientParts {
    pub kernel: FinModule,
    pub kernel_incl: ModuleMap,
    pub image: FinModule,
    pub image_incl: ModuleMap,
    pub image_proj: ModuleMap,
    pub cokernel: FinModule,
    pub cokernel_proj: ModuleMap,
}

pub fn kernel_image_quotient(phi: &ModuleMap) -> Result<SubquotientParts> {
    let ker_basis = phi.matrix().kernel();
    let (kernel, k_incl) = phi.source().on_invariant_subspace(&ker_basis)?;
    let kernel_incl = ModuleMap::linear(kernel.clone(), phi.source().clone(), k_incl)?;

    let im_basis = phi.matrix().image_basis();
    let (image, i_incl) = phi.target().on_invariant_subspace(&im_basis)?;
    let image_incl = ModuleMap::linear(image.clone(), phi.target().clone(), i_incl.clone())?;
    let proj_mat = i_incl
        .solve_matrix(phi.matrix())
        .ok_or_else(|| Error::Internal("image basis does not span image".into()))?;
    let image_proj = ModuleMap::linear(phi.source().clone(), image.clone(), proj_mat)?;

    let (cokernel, c_proj, _) = phi.target().quotient_by(&im_basis);
    let cokernel_proj = ModuleMap::linear(phi.target().clone(), cokernel.clone(), c_proj)?;

    Ok(SubquotientParts {
        kernel,
        kernel_incl,
        image,
        image_incl,
        image_proj,
        cokernel,
        cokernel_proj,
    })
}

/// F_p-basis of Hom_A(M, N), by solving the equivariance system.
pub fn hom_modules(m: &FinModule, n: &FinModule) -> Result<Vec<ModuleMap>> {
    if m.algebra != n.algebra {
        return Err(Error::BaseMismatch("module owner algebras"));
    }
    let p = m.algebra.p();
    let nm = n.dim * m.dim;
    if nm == 0 {
        return Ok(vec![]);
    }
    // unknowns X (n.dim x m.dim) flattened row-major; constraints per
    // algebra basis b: X act_M(b) - act_N(b) X = 0
    let mut rows: Vec<Vec<u32>> = Vec::new();
    for b in 0..m.algebra.dim() {
        let am = &m.action[b];
        let an = &n.action[b];
        for i in 0..n.dim {
            for j in 0..m.dim {
                let mut row = vec![0u32; nm];
                // (X am)_{ij} = sum_k X_{ik} am_{kj}
                for k in 0..m.dim {
                    row[i * m.dim + k] = (row[i * m.dim + k] + am.get(k, j)) % p;
                }
                // -(an X)_{ij} = -sum_k an_{ik} X_{kj}
                for k in 0..n.dim {
                    row[k * m.dim + j] =
                        (row[k * m.dim + j] + fp::neg_mod(an.get(i, k), p)) % p;
                }
                rows.push(row);
            }
        }
    }
    let sys = Matrix::from_rows(p, rows);
    let kernel = sys.kernel();
    let mut maps = Vec::new();
    for c in 0..kernel.cols() {
        let flat = kernel.column(c);
        let mat = Matrix::new(p, n.dim, m.dim, flat);
        maps.push(ModuleMap::linear(m.clone(), n.clone(), mat)?);
    }
    Ok(maps)
}

/// M tensor_A N with the projection from the F_p tensor square and the
/// structure bilinear map.
#[derive(Debug, Clone)]
pub struct TensorResult {
    pub module: FinModule,
    /// projection from F_p^(dim M * dim N) onto the tensor product
    pub proj: Matrix,
    pub section: Matrix,
}

impl TensorResult {
    /// Image of the pure tensor m (x) n.
    pub fn pure(&self, m: &[u32], n: &[u32]) -> Vec<u32> {
        let p = self.proj.p();
        let dn = self.section.rows() / m.len().max(1);
        let mut amb = vec![0u32; m.len() * dn];
        for (i, &mi) in m.iter().enumerate() {
            if mi == 0 {
                continue;
            }
            for (j, &nj) in n.iter().enumerate() {
                amb[i * dn + j] = (amb[i * dn + j] + mi * nj) % p;
            }
        }
        self.proj.apply(&amb)
    }
}

pub fn tensor_modules(m: &FinModule, n: &FinModule) -> Result<TensorResult> {
    if m.algebra != n.algebra {
        return Err(Error::BaseMismatch("module owner algebras"));
    }
    let a = m.algebra.clone();
    let p = a.p();
    let dm = m.dim;
    let dn = n.dim;
    let amb = dm * dn;
    // relations (a.m_i) (x) n_j - m_i (x) (a.n_j) for algebra basis a
    let mut rel_cols: Vec<Vec<u32>> = Vec::new();
    for b in 0..a.dim() {
        let am = &m.action[b];
        let an = &n.action[b];
        for i in 0..dm {
            for j in 0..dn {
                let mut v = vec![0u32; amb];
                for k in 0..dm {
                    let c = am.get(k, i);
                    if c != 0 {
                        v[k * dn + j] = (v[k * dn + j] + c) % p;
                    }
                }
                for k in 0..dn {
                    let c = an.get(k, j);
                    if c != 0 {
                        v[i * dn + k] = (v[i * dn + k] + fp::neg_mod(c, p)) % p;
                    }
                }
                rel_cols.push(v);
            }
        }
    }
    let span = Matrix::from_cols(p, amb, rel_cols);
    let q = fp::quotient_by_span(p, amb, &span);
    // induced action: a . (m (x) n) = (a.m) (x) n
    let mut action = Vec::with_capacity(a.dim());
    for b in 0..a.dim() {
        let am = &m.action[b];
        // act on ambient: am (x) id
        let mut big = Matrix::zeros(p, amb, amb);
        for i in 0..dm {
            for k in 0..dm {
                let c = am.get(i, k);
                if c == 0 {
                    continue;
                }
                for j in 0..dn {
                    big.set(i * dn + j, k * dn + j, c);
                }
            }
        }
        action.push(q.proj.mul(&big.mul(&q.section)));
    }
    let module = FinModule::new(a, q.dim, action)?;
    Ok(TensorResult {
        module,
        proj: q.proj,
        section: q.section,
    })
}

/// Base change along phi: A -> B. For an A-module M, produces the
/// B-module M tensor_A B together with the phi-semilinear unit
/// m -> m (x) 1.
#[derive(Debug, Clone)]
pub struct BaseChange {
    pub module: FinModule,
    /// projection from F_p^(dim M * dim B)
    pub proj: Matrix,
    pub section: Matrix,
    /// the semilinear map M -> M (x)_A B, m -> m (x) 1
    pub unit: ModuleMap,
}

pub fn base_change(m: &FinModule, phi: &AlgebraMap) -> Result<BaseChange> {
    if &m.algebra != phi.source() {
        return Err(Error::BaseMismatch("module algebra and map source"));
    }
    let a = phi.source().clone();
    let b = phi.target().clone();
    let p = a.p();
    let dm = m.dim;
    let db = b.dim();
    let amb = dm * db;
    // relations (a.m) (x) c - m (x) (phi(a) c)
    let mut rel_cols: Vec<Vec<u32>> = Vec::new();
    for ai in 0..a.dim() {
        let am = &m.action[ai];
        let phia = phi.apply(&a.basis_vec(ai));
        let bmul = b.left_mul_matrix(&phia);
        for i in 0..dm {
            for j in 0..db {
                let mut v = vec![0u32; amb];
                for k in 0..dm {
                    let c = am.get(k, i);
                    if c != 0 {
                        v[k * db + j] = (v[k * db + j] + c) % p;
                    }
                }
                for k in 0..db {
                    let c = bmul.get(k, j);
                    if c != 0 {
                        v[i * db + k] = (v[i * db + k] + fp::neg_mod(c, p)) % p;
                    }
                }
                rel_cols.push(v);
            }
        }
    }
    let span = Matrix::from_cols(p, amb, rel_cols);
    let q = fp::quotient_by_span(p, amb, &span);
    // B acts on the right factor
    let mut action = Vec::with_capacity(db);
    for bi in 0..db {
        let bm = b.left_mul_matrix(&b.basis_vec(bi));
        let mut big = Matrix::zeros(p, amb, amb);
        for i in 0..dm {
            for j in 0..db {
                for k in 0..db {
                    let c = bm.get(j, k);
                    if c != 0 {
                        big.set(i * db + j, i * db + k, c);
                    }
                }
            }
        }
        action.push(q.proj.mul(&big.mul(&q.section)));
    }
    let module = FinModule::new(b.clone(), q.dim, action)?;
    // unit: m_i -> m_i (x) 1_B
    let mut unit_mat = Matrix::zeros(p, q.dim, dm);
    for i in 0..dm {
        let mut ambv = vec![0u32; amb];
        for (j, &uc) in b.unit().iter().enumerate() {
            ambv[i * db + j] = uc;
        }
        let img = q.proj.apply(&ambv);
        for (r, &v) in img.iter().enumerate() {
            unit_mat.set(r, i, v);
        }
    }
    let unit = ModuleMap::semilinear(phi, m.clone(), module.clone(), unit_mat)?;
    Ok(BaseChange {
        module,
        proj: q.proj,
        section: q.section,
        unit,
    })
}

/// A prime ideal of a finite commutative algebra, as a subspace, with
/// the primitive idempotent of the corresponding local factor.
#[derive(Debug, Clone)]
pub struct PrimeIdeal {
    /// columns span the ideal, in canonical (column-span) form
    pub subspace: Matrix,
    pub idempotent: Vec<u32>,
}

/// All idempotents and all prime ideals. Every prime of a finite
/// commutative algebra is maximal; primes are the kernels of the maps
/// onto the residue fields of the local factors.
pub fn enumerate_idempotents_and_primes(
    a: &AlgebraRef,
    caps: &Caps,
) -> Result<(Vec<Vec<u32>>, Vec<PrimeIdeal>)> {
    let idems = a.idempotents(caps)?;
    let prims = a.primitive_idempotents(caps)?;
    let mut primes = Vec::new();
    for e in &prims {
        let me = a.left_mul_matrix(e);
        let factor_basis = me.image_basis();
        let (factor, incl) = a.subalgebra(&factor_basis, e, caps)?;
        let rad = factor.nilradical();
        // m_e = ker( A -> eA -> eA/rad )
        let to_factor = incl
            .solve_matrix(&a.left_mul_matrix(e))
            .ok_or_else(|| Error::Internal("factor projection failed".into()))?;
        let q = fp::quotient_by_span(a.p(), factor.dim(), &rad);
        let composite = q.proj.mul(&to_factor);
        let subspace = composite.kernel().span_canonical();
        primes.push(PrimeIdeal {
            subspace,
            idempotent: e.clone(),
        });
    }
    // canonical order: sort primes by their canonical subspace data
    primes.sort_by(|x, y| {
        let kx: Vec<u32> = (0..x.subspace.cols())
            .flat_map(|c| x.subspace.column(c))
            .collect();
        let ky: Vec<u32> = (0..y.subspace.cols())
            .flat_map(|c| y.subspace.column(c))
            .collect();
        kx.cmp(&ky)
    });
    Ok((idems, primes))
}
