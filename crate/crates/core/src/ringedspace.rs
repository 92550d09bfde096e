//! Finite ringed spaces: finite posets of points with stalk algebras and
//! generization maps, their morphisms, and the Spec constructor.
//!
//! Opens are the generization-closed subsets (Alexandrov topology from the
//! specialization order): if x is in U and y >= x then y is in U. The
//! minimal open of x is { y : y >= x }, and the stalk at x is the value of
//! any sheaf on that minimal open.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::algebra::{
    enumerate_idempotents_and_primes, AlgebraMap, AlgebraRef,
};
use crate::error::{Caps, Error, Result, ValidationReport};
use crate::fp::Matrix;

pub type SpaceRef = Arc<FinRingedSpace>;

/// A generization-closed set of point indices, sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Open(Vec<usize>);

impl Open {
    pub fn new(mut points: Vec<usize>) -> Self {
        points.sort_unstable();
        points.dedup();
        Open(points)
    }

    pub fn empty() -> Self {
        Open(Vec::new())
    }

    pub fn points(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn union(&self, other: &Open) -> Open {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Open::new(v)
    }

    pub fn intersect(&self, other: &Open) -> Open {
        Open(self
            .0
            .iter()
            .copied()
            .filter(|x| other.contains(*x))
            .collect())
    }

    pub fn is_subset_of(&self, other: &Open) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }
}

#[derive(Debug, Clone)]
pub struct FinRingedSpace {
    labels: Vec<String>,
    /// leq[x * n + y] = true iff x <= y (y is a generization of x)
    leq: Vec<bool>,
    stalks: Vec<AlgebraRef>,
    /// generization maps res_{x -> y} : O_x -> O_y for x <= y, x != y
    res: BTreeMap<(usize, usize), AlgebraMap>,
}

/// Point labels are presentation metadata; space identity is structural.
impl PartialEq for FinRingedSpace {
    fn eq(&self, other: &Self) -> bool {
        self.leq == other.leq && self.stalks == other.stalks && self.res == other.res
    }
}

impl Eq for FinRingedSpace {}

impl FinRingedSpace {
    pub fn new(
        labels: Vec<String>,
        leq: Vec<bool>,
        stalks: Vec<AlgebraRef>,
        res: BTreeMap<(usize, usize), AlgebraMap>,
        caps: &Caps,
    ) -> Result<SpaceRef> {
        let n = labels.len();
        if n > caps.max_points {
            return Err(Error::SizeCap {
                what: "points in a ringed space",
                limit: caps.max_points,
                actual: n,
            });
        }
        if leq.len() != n * n || stalks.len() != n {
            return Err(Error::Shape("ringed space data sizes".into()));
        }
        let s = FinRingedSpace {
            labels,
            leq,
            stalks,
            res,
        };
        s.validate().into_result()?;
        Ok(Arc::new(s))
    }

    pub fn n_points(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    pub fn point_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn p(&self) -> u32 {
        self.stalks.first().map(|a| a.p()).unwrap_or(2)
    }

    pub fn stalk(&self, x: usize) -> &AlgebraRef {
        &self.stalks[x]
    }

    /// x <= y: y is a generization of x.
    pub fn le(&self, x: usize, y: usize) -> bool {
        self.leq[x * self.n_points() + y]
    }

    /// The generization map O_x -> O_y for x <= y.
    pub fn res(&self, x: usize, y: usize) -> AlgebraMap {
        if x == y {
            AlgebraMap::identity(&self.stalks[x])
        } else {
            self.res[&(x, y)].clone()
        }
    }

    /// Minimal open of x: all generizations of x.
    pub fn minimal_open(&self, x: usize) -> Open {
        Open::new((0..self.n_points()).filter(|&y| self.le(x, y)).collect())
    }

    pub fn whole(&self) -> Open {
        Open::new((0..self.n_points()).collect())
    }

    pub fn is_open(&self, set: &Open) -> bool {
        set.points().iter().all(|&x| {
            (0..self.n_points()).all(|y| !self.le(x, y) || set.contains(y))
        })
    }

    /// All opens (generization-closed subsets), in canonical order.
    pub fn opens(&self, caps: &Caps) -> Result<Vec<Open>> {
        let n = self.n_points();
        if n > caps.max_points {
            return Err(Error::SizeCap {
                what: "points for open enumeration",
                limit: caps.max_points,
                actual: n,
            });
        }
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << n) {
            let set = Open::new((0..n).filter(|i| mask & (1 << i) != 0).collect());
            if self.is_open(&set) {
                out.push(set);
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let n = self.n_points();
        if n == 0 {
            return rep;
        }
        let p = self.stalks[0].p();
        for (i, a) in self.stalks.iter().enumerate() {
            if a.p() != p {
                rep.push(format!("stalk {} has characteristic {} != {}", i, a.p(), p));
            }
            rep.merge(a.validate());
        }
        // preorder
        for x in 0..n {
            if !self.le(x, x) {
                rep.push(format!("relation not reflexive at {x}"));
            }
            for y in 0..n {
                for z in 0..n {
                    if self.le(x, y) && self.le(y, z) && !self.le(x, z) {
                        rep.push(format!("relation not transitive on ({x},{y},{z})"));
                    }
                }
            }
        }
        // res maps present, valid, functorial
        for x in 0..n {
            for y in 0..n {
                if x == y || !self.le(x, y) {
                    continue;
                }
                let Some(r) = self.res.get(&(x, y)) else {
                    rep.push(format!("missing res map {x} -> {y}"));
                    continue;
                };
                if r.source() != &self.stalks[x] || r.target() != &self.stalks[y] {
                    rep.push(format!("res map {x} -> {y} has wrong endpoints"));
                }
                rep.merge(r.validate());
            }
        }
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if self.le(x, y) && self.le(y, z) {
                        let direct = self.res(x, z);
                        let via = self.res(y, z).compose(&self.res(x, y));
                        match via {
                            Ok(v) => {
                                if v.matrix() != direct.matrix() {
                                    rep.push(format!(
                                        "res functoriality fails on {x} <= {y} <= {z}"
                                    ));
                                }
                            }
                            Err(e) => rep.push(format!("res composition error: {e}")),
                        }
                    }
                }
            }
        }
        rep
    }

    /// Disjoint union of two spaces (no order relations across parts).
    pub fn disjoint_union(a: &SpaceRef, b: &SpaceRef, caps: &Caps) -> Result<SpaceRef> {
        let na = a.n_points();
        let nb = b.n_points();
        let n = na + nb;
        let mut labels: Vec<String> = a.labels.iter().map(|l| format!("l.{l}")).collect();
        labels.extend(b.labels.iter().map(|l| format!("r.{l}")));
        let mut leq = vec![false; n * n];
        for x in 0..na {
            for y in 0..na {
                leq[x * n + y] = a.le(x, y);
            }
        }
        for x in 0..nb {
            for y in 0..nb {
                leq[(na + x) * n + (na + y)] = b.le(x, y);
            }
        }
        let mut stalks = a.stalks.clone();
        stalks.extend(b.stalks.clone());
        let mut res = BTreeMap::new();
        for (&(x, y), m) in &a.res {
            res.insert((x, y), m.clone());
        }
        for (&(x, y), m) in &b.res {
            res.insert((na + x, na + y), m.clone());
        }
        FinRingedSpace::new(labels, leq, stalks, res, caps)
    }
}

/// A morphism of finite ringed spaces f : T -> S: a monotone point map
/// with one algebra map O_{S,f(t)} -> O_{T,t} per source point, natural
/// with respect to generization on both sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingedMap {
    source: SpaceRef,
    target: SpaceRef,
    point_map: Vec<usize>,
    pullbacks: Vec<AlgebraMap>,
}

impl RingedMap {
    pub fn new(
        source: SpaceRef,
        target: SpaceRef,
        point_map: Vec<usize>,
        pullbacks: Vec<AlgebraMap>,
    ) -> Result<Self> {
        if point_map.len() != source.n_points() || pullbacks.len() != source.n_points() {
            return Err(Error::Shape("ringed map data sizes".into()));
        }
        let f = RingedMap {
            source,
            target,
            point_map,
            pullbacks,
        };
        f.validate().into_result()?;
        Ok(f)
    }

    pub fn identity(s: &SpaceRef) -> Self {
        RingedMap {
            source: s.clone(),
            target: s.clone(),
            point_map: (0..s.n_points()).collect(),
            pullbacks: (0..s.n_points())
                .map(|x| AlgebraMap::identity(s.stalk(x)))
                .collect(),
        }
    }

    pub fn source(&self) -> &SpaceRef {
        &self.source
    }
    pub fn target(&self) -> &SpaceRef {
        &self.target
    }

    pub fn apply_point(&self, t: usize) -> usize {
        self.point_map[t]
    }

    /// The algebra map O_{S, f(t)} -> O_{T, t}.
    pub fn pullback_at(&self, t: usize) -> &AlgebraMap {
        &self.pullbacks[t]
    }

    pub fn preimage(&self, v: &Open) -> Open {
        Open::new(
            (0..self.source.n_points())
                .filter(|&t| v.contains(self.point_map[t]))
                .collect(),
        )
    }

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let nt = self.source.n_points();
        for t in 0..nt {
            let ft = self.point_map[t];
            if ft >= self.target.n_points() {
                rep.push(format!("point map out of range at {t}"));
                continue;
            }
            let pb = &self.pullbacks[t];
            if pb.source() != self.target.stalk(ft) || pb.target() != self.source.stalk(t) {
                rep.push(format!("pullback at {t} has wrong endpoints"));
            }
            rep.merge(pb.validate());
        }
        // monotone
        for t in 0..nt {
            for u in 0..nt {
                if self.source.le(t, u) && !self.target.le(self.point_map[t], self.point_map[u]) {
                    rep.push(format!("point map not monotone on {t} <= {u}"));
                }
            }
        }
        // naturality: for t <= u, res_{f(t)->f(u)} then pullback_u equals
        // pullback_t then res_{t->u}
        for t in 0..nt {
            for u in 0..nt {
                if !self.source.le(t, u) || t == u {
                    continue;
                }
                let ft = self.point_map[t];
                let fu = self.point_map[u];
                let left = self.pullbacks[u].compose(&self.target.res(ft, fu));
                let right = self.source.res(t, u).compose(&self.pullbacks[t]);
                match (left, right) {
                    (Ok(l), Ok(r)) => {
                        if l.matrix() != r.matrix() {
                            rep.push(format!("naturality square fails on {t} <= {u}"));
                        }
                    }
                    _ => rep.push(format!("naturality composition error on {t} <= {u}")),
                }
            }
        }
        // continuity is automatic for monotone maps on Alexandrov spaces,
        // but check it anyway on minimal opens
        for s in 0..self.target.n_points() {
            let u = self.target.minimal_open(s);
            if !self.source.is_open(&self.preimage(&u)) {
                rep.push(format!("preimage of minimal open of {s} is not open"));
            }
        }
        rep
    }

    /// self after other: self o other (other: U -> T, self: T -> S).
    pub fn compose(&self, other: &RingedMap) -> Result<RingedMap> {
        if other.target != self.source {
            return Err(Error::BaseMismatch("spaces in ringed map composition"));
        }
        let point_map: Vec<usize> = other
            .point_map
            .iter()
            .map(|&t| self.point_map[t])
            .collect();
        let mut pullbacks = Vec::new();
        for u in 0..other.source.n_points() {
            let t = other.point_map[u];
            // (fg)# at u = g#_u o f#_{g(u)}
            pullbacks.push(other.pullbacks[u].compose(&self.pullbacks[t])?);
        }
        RingedMap::new(
            other.source.clone(),
            self.target.clone(),
            point_map,
            pullbacks,
        )
    }
}

/// The spectrum of a finite commutative algebra: a discrete space whose
/// points are the primes, with local factors as stalks. Carries the data
/// needed to build spec maps and distinguished-open audits.
#[derive(Debug, Clone)]
pub struct SpecSpace {
    pub algebra: AlgebraRef,
    pub space: SpaceRef,
    /// prime ideals as canonical subspaces of the algebra, one per point
    pub primes: Vec<Matrix>,
    /// primitive idempotent of each local factor
    pub idempotents: Vec<Vec<u32>>,
    /// factor maps A -> O_point
    pub factor_maps: Vec<AlgebraMap>,
}

/// Spec A: points are the primes of A; the order is discrete because a
/// finite commutative algebra is Artinian and every prime is maximal.
pub fn spec(a: &AlgebraRef, caps: &Caps) -> Result<SpecSpace> {
    let (_, primes) = enumerate_idempotents_and_primes(a, caps)?;
    let n = primes.len();
    let mut labels = Vec::with_capacity(n);
    let mut stalks = Vec::with_capacity(n);
    let mut factor_maps = Vec::with_capacity(n);
    let mut idempotents = Vec::with_capacity(n);
    let mut prime_spans = Vec::with_capacity(n);
    for (i, pr) in primes.iter().enumerate() {
        labels.push(format!("m{i}"));
        let e = &pr.idempotent;
        let me = a.left_mul_matrix(e);
        let basis = me.image_basis();
        let (factor, incl) = a.subalgebra(&basis, e, caps)?;
        let to_factor = incl
            .solve_matrix(&me)
            .ok_or_else(|| Error::Internal("factor projection failed".into()))?;
        factor_maps.push(AlgebraMap::new(a.clone(), factor.clone(), to_factor)?);
        stalks.push(factor);
        idempotents.push(e.clone());
        prime_spans.push(pr.subspace.clone());
    }
    let mut leq = vec![false; n * n];
    for x in 0..n {
        leq[x * n + x] = true;
    }
    let space = FinRingedSpace::new(labels, leq, stalks, BTreeMap::new(), caps)?;
    Ok(SpecSpace {
        algebra: a.clone(),
        space,
        primes: prime_spans,
        idempotents,
        factor_maps,
    })
}

/// Spec of an algebra map: Spec B -> Spec A. Points map to contractions;
/// stalk components are the induced maps of local factors.
pub fn spec_map(phi: &AlgebraMap, spec_b: &SpecSpace, spec_a: &SpecSpace) -> Result<RingedMap> {
    if phi.source() != &spec_a.algebra || phi.target() != &spec_b.algebra {
        return Err(Error::BaseMismatch("algebras for spec map"));
    }
    let a = &spec_a.algebra;
    let nb = spec_b.space.n_points();
    let mut point_map = Vec::with_capacity(nb);
    let mut pullbacks = Vec::with_capacity(nb);
    for q in 0..nb {
        // contraction of the prime q of B: kernel of A -> B -> B/q
        let quot = crate::fp::quotient_by_span(a.p(), spec_b.algebra.dim(), &spec_b.primes[q]);
        let composite = quot.proj.mul(phi.matrix());
        let contraction = composite.kernel().span_canonical();
        let p_idx = spec_a
            .primes
            .iter()
            .position(|pr| pr.span_eq(&contraction))
            .ok_or_else(|| {
                Error::Internal("contraction is not among the enumerated primes".into())
            })?;
        point_map.push(p_idx);
        // O_{A, p} -> O_{B, q}: e_p a -> e_q phi(a)
        // matrix: factor_B o phi o (inclusion of stalk_A into A)
        let stalk_a = spec_a.space.stalk(p_idx);
        let e_p = &spec_a.idempotents[p_idx];
        let me = a.left_mul_matrix(e_p);
        let basis = me.image_basis();
        // inclusion matrix of the stalk basis into A
        let incl = basis;
        let comp = spec_b.factor_maps[q]
            .matrix()
            .mul(&phi.matrix().mul(&incl));
        pullbacks.push(AlgebraMap::new(
            stalk_a.clone(),
            spec_b.space.stalk(q).clone(),
            comp,
        )?);
    }
    RingedMap::new(
        spec_b.space.clone(),
        spec_a.space.clone(),
        point_map,
        pullbacks,
    )
}

impl SpecSpace {
    /// The distinguished open D(f) = { primes not containing f }.
    pub fn distinguished_open(&self, f: &[u32]) -> Open {
        Open::new(
            (0..self.space.n_points())
                .filter(|&i| self.primes[i].coords_of(f).is_none())
                .collect(),
        )
    }

    /// Check that every open is a union of distinguished opens, by brute
    /// force over the (capped) element set.
    pub fn verify_distinguished_cover(&self, caps: &Caps) -> Result<ValidationReport> {
        let mut rep = ValidationReport::default();
        if self.algebra.element_count() > caps.max_enumeration as u128 {
            return Err(Error::SizeCap {
                what: "element enumeration",
                limit: caps.max_enumeration,
                actual: usize::MAX,
            });
        }
        let distinguished: Vec<Open> = crate::fp::all_vectors(self.algebra.p(), self.algebra.dim())
            .map(|f| self.distinguished_open(&f))
            .collect();
        for u in self.space.opens(caps)? {
            let mut cover = Open::empty();
            for d in &distinguished {
                if d.is_subset_of(&u) {
                    cover = cover.union(d);
                }
            }
            if cover != u {
                rep.push(format!(
                    "open {:?} is not a union of distinguished opens",
                    u.points()
                ));
            }
        }
        Ok(rep)
    }
}

/// Hand-built helper: a space from explicit parts where res maps are given
/// only for covering pairs; composites are filled in along any chain and
/// validated for path independence by `FinRingedSpace::new`.
pub fn space_from_edges(
    labels: Vec<String>,
    le_pairs: &[(usize, usize)],
    stalks: Vec<AlgebraRef>,
    edge_res: &[((usize, usize), AlgebraMap)],
    caps: &Caps,
) -> Result<SpaceRef> {
    let n = labels.len();
    let mut leq = vec![false; n * n];
    for x in 0..n {
        leq[x * n + x] = true;
    }
    for &(x, y) in le_pairs {
        leq[x * n + y] = true;
    }
    // transitive closure
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    if leq[x * n + y] && leq[y * n + z] && !leq[x * n + z] {
                        leq[x * n + z] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut res: BTreeMap<(usize, usize), AlgebraMap> = BTreeMap::new();
    for ((x, y), m) in edge_res {
        res.insert((*x, *y), m.clone());
    }
    // close res maps under composition until all x < y pairs are present
    loop {
        let mut changed = false;
        for x in 0..n {
            for y in 0..n {
                if x == y || !leq[x * n + y] || res.contains_key(&(x, y)) {
                    continue;
                }
                for z in 0..n {
                    if z != x && z != y && leq[x * n + z] && leq[z * n + y] {
                        if let (Some(a), Some(b)) = (res.get(&(x, z)), res.get(&(z, y))) {
                            let c = b.compose(a)?;
                            res.insert((x, y), c);
                            changed = true;
                            break;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    FinRingedSpace::new(labels, leq, stalks, res, caps)
}
