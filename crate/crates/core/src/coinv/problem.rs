//! Spaces of coinvariants M/g_out·M by double truncation: tensor vectors of
//! total degree ≤ D and out-algebra generators with poles of order ≤ P.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::exactnum::cyc::Rat;
use crate::exactnum::{CycNum, Point};
use crate::linalg::{Eliminator, SparseRow};
use crate::repmods::{Gen, GradedModule};
use crate::twistalg::j_indices;
use crate::wfun::{check_points, coeff_window, gout_orb_basis, trig_generator, GFun};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Model {
    Trig,
    Orb,
}

/// Where a module is inserted.
#[derive(Clone, Debug, PartialEq)]
pub enum Location {
    Zero,
    Infinity,
    Marked(CycNum),
}

impl Location {
    fn point(&self, n: u32) -> Point {
        match self {
            Location::Zero => Point::Finite(CycNum::zero(n)),
            Location::Infinity => Point::Infinity,
            Location::Marked(u) => Point::Finite(u.clone()),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Site {
    pub location: Location,
    pub module: GradedModule,
}

/// Insertion data of a coinvariant computation.
#[derive(Clone, Debug)]
pub struct CoinvProblem {
    pub n: u32,
    pub model: Model,
    pub sites: Vec<Site>,
}

/// Result of one truncation level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelDim {
    pub degree: usize,
    pub poles: usize,
    pub columns: usize,
    pub rank: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CcReport {
    pub levels: Vec<LevelDim>,
    pub stabilized: bool,
    pub dim: usize,
}

/// Expansion of a generator at every site: per site, (α, mode, coefficient).
struct Expanded {
    terms: Vec<Vec<(usize, i64, CycNum)>>,
    pole: usize,
    /// root (orb) or charge (trig) key shift of the generator
    shift: Key,
}

/// Block label of a tensor vector: total weight or total charge.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Weight(Vec<Rat>),
    Charge(usize),
}

impl CoinvProblem {
    pub fn new(n: u32, model: Model, sites: Vec<Site>) -> Result<Self> {
        let marked: Vec<CycNum> = sites
            .iter()
            .filter_map(|s| match &s.location {
                Location::Marked(u) => Some(u.clone()),
                _ => None,
            })
            .collect();
        check_points(n, &marked)?;
        let level = sites.first().map(|s| s.module.engine.level.clone());
        for s in &sites {
            if Some(&s.module.engine.level) != level.as_ref() {
                return Err(Error::InvalidInput("all modules must have the same level".into()));
            }
            if s.module.n() != n {
                return Err(Error::InvalidInput("module rank differs from N".into()));
            }
            let ok = matches!(
                (&s.location, s.module.engine.tag),
                (Location::Zero, crate::twistalg::AlgTag::Node0)
                    | (Location::Infinity, crate::twistalg::AlgTag::NodeInf)
                    | (Location::Marked(_), crate::twistalg::AlgTag::Marked)
            );
            if !ok {
                return Err(Error::InvalidInput("module algebra does not match its location".into()));
            }
            if model == Model::Trig && !matches!(s.location, Location::Marked(_)) {
                return Err(Error::InvalidInput("the trigonometric model has no node insertions".into()));
            }
        }
        Ok(CoinvProblem { n, model, sites })
    }

    pub fn marked_points(&self) -> Vec<CycNum> {
        self.sites
            .iter()
            .filter_map(|s| match &s.location {
                Location::Marked(u) => Some(u.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn max_degree(&self) -> usize {
        self.sites.iter().map(|s| s.module.dmax).min().unwrap_or(0)
    }

    fn generators(&self, p: usize) -> Result<Vec<GFun>> {
        let pts = self.marked_points();
        match self.model {
            Model::Orb => gout_orb_basis(self.n, &pts, p),
            Model::Trig => {
                let mut out = Vec::new();
                for u in &pts {
                    for (a, b) in j_indices(self.n) {
                        for m in 0..p {
                            out.push(trig_generator(self.n, a, b, u, m)?);
                        }
                    }
                }
                Ok(out)
            }
        }
    }

    fn expand(&self, f: &GFun, dmax: usize) -> Result<Expanded> {
        let n = self.n;
        let mut terms = Vec::new();
        let mut pole = 0usize;
        for s in &self.sites {
            let at = s.location.point(n);
            let p = f.pole_order(&at)?.max(0) as usize;
            pole = pole.max(p);
            let mut t = Vec::new();
            for (alpha, g) in &f.comps {
                let w = coeff_window(g, &at, -(p as i64), dmax as i64)?;
                for (k, c) in w.into_iter().enumerate() {
                    if !c.is_zero() {
                        t.push((*alpha, k as i64 - p as i64, c));
                    }
                }
            }
            terms.push(t);
        }
        let st = &self.sites[0].module.engine.st;
        let alpha = *f.comps.keys().next().ok_or_else(|| Error::Internal("zero generator".into()))?;
        let shift = match self.model {
            Model::Orb => {
                let r = st.eb.root(alpha);
                for a in f.comps.keys() {
                    if st.eb.root(*a) != r {
                        return Err(Error::Internal("orbifold generator is not weight-homogeneous".into()));
                    }
                }
                Key::Weight(r.into_iter().map(|x| Rat::from_integer(x.into())).collect())
            }
            Model::Trig => {
                let c = st.eb.charge(alpha);
                if f.comps.keys().any(|a| st.eb.charge(*a) != c) {
                    return Err(Error::Internal("trigonometric generator is not charge-homogeneous".into()));
                }
                Key::Charge(c)
            }
        };
        Ok(Expanded { terms, pole, shift })
    }

    fn key_of(&self, t: &[(usize, usize)]) -> Key {
        match self.model {
            Model::Orb => {
                let mut w = vec![Rat::from_integer(0.into()); self.n as usize];
                for (s, &(d, i)) in t.iter().enumerate() {
                    for (a, x) in w.iter_mut().zip(self.sites[s].module.weight(d, i)) {
                        *a += x;
                    }
                }
                Key::Weight(w)
            }
            Model::Trig => {
                let c: usize = t.iter().enumerate().map(|(s, &(d, i))| self.sites[s].module.charge(d, i)).sum();
                Key::Charge(c % self.n as usize)
            }
        }
    }

    fn add_key(&self, a: &Key, b: &Key) -> Key {
        match (a, b) {
            (Key::Weight(x), Key::Weight(y)) => Key::Weight(x.iter().zip(y).map(|(p, q)| p + q).collect()),
            (Key::Charge(x), Key::Charge(y)) => Key::Charge((x + y) % self.n as usize),
            _ => unreachable!("mixed block keys"),
        }
    }

    fn neg_key(&self, a: &Key) -> Key {
        match a {
            Key::Weight(x) => Key::Weight(x.iter().map(|p| -p).collect()),
            Key::Charge(x) => Key::Charge((self.n as usize - x) % self.n as usize),
        }
    }

    /// All tensor basis vectors of total degree ≤ d, as per-site (degree, index).
    fn tensor_basis(&self, d: usize) -> Vec<Vec<(usize, usize)>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(
            p: &CoinvProblem,
            s: usize,
            left: usize,
            cur: &mut Vec<(usize, usize)>,
            out: &mut Vec<Vec<(usize, usize)>>,
        ) {
            if s == p.sites.len() {
                out.push(cur.clone());
                return;
            }
            for d in 0..=left.min(p.sites[s].module.dmax) {
                for i in 0..p.sites[s].module.dim(d) {
                    cur.push((d, i));
                    rec(p, s + 1, left - d, cur, out);
                    cur.pop();
                }
            }
        }
        rec(self, 0, d, &mut cur, &mut out);
        out
    }

    /// Corank of the relation matrix at module degree ≤ `d` and pole order ≤ `p`.
    pub fn corank(&mut self, d: usize, p: usize) -> Result<LevelDim> {
        if d > self.max_degree() {
            return Err(Error::Truncation(format!("degree {d} exceeds the module truncation {}", self.max_degree())));
        }
        let basis = self.tensor_basis(d);
        // columns grouped by block, high degree first within a block
        let mut blocks: BTreeMap<Key, Vec<usize>> = BTreeMap::new();
        for (i, t) in basis.iter().enumerate() {
            blocks.entry(self.key_of(t)).or_default().push(i);
        }
        let zero_key = match self.model {
            Model::Orb => Some(Key::Weight(vec![Rat::from_integer(0.into()); self.n as usize])),
            Model::Trig => None,
        };
        let gens = self.generators(p)?;
        let expanded: Vec<Expanded> = gens.iter().map(|g| self.expand(g, d)).collect::<Result<_>>()?;
        let mut columns = 0;
        let mut rank = 0;
        let mut dim = 0;
        for (key, cols) in &blocks {
            if let Some(z) = &zero_key {
                if key != z {
                    continue;
                }
            }
            let (_, elim) = self.eliminate_block(d, key, &basis, cols, &expanded)?;
            columns += cols.len();
            rank += elim.rank();
            dim += cols.len() - elim.rank();
        }
        Ok(LevelDim { degree: d, poles: p, columns, rank, dim })
    }

    /// Row-reduces all admissible relations landing in one block; returns the
    /// column index of every basis tensor of the block and the eliminator.
    fn eliminate_block(
        &mut self,
        d: usize,
        key: &Key,
        basis: &[Vec<(usize, usize)>],
        cols: &[usize],
        expanded: &[Expanded],
    ) -> Result<(HashMap<Vec<(usize, usize)>, usize>, Eliminator<CycNum>)> {
        let total = |t: &[(usize, usize)]| t.iter().map(|x| x.0).sum::<usize>();
        let mut order = cols.to_vec();
        order.sort_by_key(|&i| (std::cmp::Reverse(total(&basis[i])), i));
        let col_index: HashMap<Vec<(usize, usize)>, usize> =
            order.iter().enumerate().map(|(c, &i)| (basis[i].clone(), c)).collect();
        let mut elim: Eliminator<CycNum> = Eliminator::new();
        for e in expanded {
            let need = self.add_key(key, &self.neg_key(&e.shift));
            for w in basis {
                if total(w) + e.pole > d || self.key_of(w) != need {
                    continue;
                }
                let row = self.apply_generator(e, w, &col_index)?;
                if !row.is_empty() {
                    elim.insert(row)?;
                }
            }
        }
        Ok((col_index, elim))
    }

    /// Whether a homogeneous vector, given as (per-site (degree, index), coefficient)
    /// terms, lies in the span of the relations at degree ≤ `d` and poles ≤ `p`.
    pub fn in_relation_span(&mut self, v: &[(Vec<(usize, usize)>, CycNum)], d: usize, p: usize) -> Result<bool> {
        if d > self.max_degree() {
            return Err(Error::Truncation(format!("degree {d} exceeds the module truncation {}", self.max_degree())));
        }
        let Some((first, _)) = v.first() else { return Ok(true) };
        if first.len() != self.sites.len() {
            return Err(Error::InvalidInput("tensor terms must have one entry per site".into()));
        }
        let key = self.key_of(first);
        let basis = self.tensor_basis(d);
        let cols: Vec<usize> = (0..basis.len()).filter(|&i| self.key_of(&basis[i]) == key).collect();
        let gens = self.generators(p)?;
        let expanded: Vec<Expanded> = gens.iter().map(|g| self.expand(g, d)).collect::<Result<_>>()?;
        let (index, elim) = self.eliminate_block(d, &key, &basis, &cols, &expanded)?;
        let mut row: SparseRow<CycNum> = BTreeMap::new();
        for (t, c) in v {
            let col = *index
                .get(t)
                .ok_or_else(|| Error::InvalidInput("vector is not homogeneous or exceeds the degree bound".into()))?;
            let ent = row.entry(col).or_insert_with(|| CycNum::zero(self.n));
            *ent += c;
            if ent.is_zero() {
                row.remove(&col);
            }
        }
        Ok(elim.reduce(row).is_empty())
    }

    fn apply_generator(
        &mut self,
        e: &Expanded,
        w: &[(usize, usize)],
        cols: &HashMap<Vec<(usize, usize)>, usize>,
    ) -> Result<SparseRow<CycNum>> {
        let n = self.n;
        let mut row: SparseRow<CycNum> = BTreeMap::new();
        for (s, terms) in e.terms.iter().enumerate() {
            let (ds, is) = w[s];
            for (alpha, mode, c) in terms {
                if *mode > ds as i64 {
                    continue;
                }
                let y = self.sites[s].module.act(Gen { mode: *mode, alpha: *alpha }, ds, is)?;
                let nd = (ds as i64 - mode) as usize;
                for (j, v) in y {
                    let mut t = w.to_vec();
                    t[s] = (nd, j);
                    let col = *cols
                        .get(&t)
                        .ok_or_else(|| Error::Internal("relation left the block or the truncation".into()))?;
                    let x = c.scale(&v);
                    let ent = row.entry(col).or_insert_with(|| CycNum::zero(n));
                    *ent += &x;
                    if ent.is_zero() {
                        row.remove(&col);
                    }
                }
            }
        }
        Ok(row)
    }

    /// Coranks along the diagonal D = P = ℓ for ℓ = 1..=max_level; the value
    /// is called stabilized when two consecutive levels agree.
    pub fn cc_dim(&mut self, max_level: usize) -> Result<CcReport> {
        if max_level == 0 {
            return Err(Error::InvalidInput("truncation levels start at 1".into()));
        }
        let mut levels = Vec::new();
        for l in 1..=max_level {
            levels.push(self.corank(l, l)?);
        }
        let k = levels.len();
        let stabilized = k >= 2 && levels[k - 1].dim == levels[k - 2].dim;
        let dim = levels[k - 1].dim;
        Ok(CcReport { levels, stabilized, dim })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::cyc::{rat, rat_int};
    use crate::repmods::irreducible_node;
    use crate::twistalg::{weight_tilde, AffineWeight, FinRep, Side};

    fn marked(u: i64, m: &GradedModule) -> Site {
        Site { location: Location::Marked(CycNum::from_int(m.n(), u)), module: m.clone() }
    }

    #[test]
    fn weyl_coinvariants_are_v() {
        let m = GradedModule::weyl(2, FinRep::Fund, &rat_int(1), 3).unwrap();
        let r = CoinvProblem::new(2, Model::Trig, vec![marked(3, &m)]).unwrap().cc_dim(3).unwrap();
        assert!(r.stabilized);
        assert_eq!(r.dim, 2);
        let r = CoinvProblem::new(2, Model::Trig, vec![marked(3, &m), marked(5, &m)]).unwrap().cc_dim(2).unwrap();
        assert!(r.stabilized);
        assert_eq!(r.dim, 4);
        let m3 = GradedModule::weyl(3, FinRep::Fund, &rat_int(1), 2).unwrap();
        let r = CoinvProblem::new(3, Model::Trig, vec![marked(2, &m3)]).unwrap().cc_dim(2).unwrap();
        assert!(r.stabilized);
        assert_eq!(r.dim, 3);
    }

    #[test]
    fn verma_and_irreducible_nodes_agree() {
        let k = rat_int(1);
        let lam = AffineWeight::from_h_values(k.clone(), &[rat_int(1)]);
        let (lt, ltp) = weight_tilde(&lam, &k).unwrap();
        let li = crate::coinv::integrable_marked(2, FinRep::Fund, &k, 3).unwrap();
        let dims = |z: GradedModule, i: GradedModule| {
            let sites = vec![
                Site { location: Location::Zero, module: z },
                marked(3, &li),
                Site { location: Location::Infinity, module: i },
            ];
            CoinvProblem::new(2, Model::Orb, sites).unwrap().cc_dim(3).unwrap()
        };
        let a = dims(
            GradedModule::verma(2, Side::Zero, &ltp, 3).unwrap(),
            GradedModule::verma(2, Side::Infinity, &lt, 3).unwrap(),
        );
        let b = dims(
            irreducible_node(2, Side::Zero, &ltp, 3).unwrap(),
            irreducible_node(2, Side::Infinity, &lt, 3).unwrap(),
        );
        assert!(a.stabilized && b.stabilized);
        assert_eq!(a.dim, b.dim);
        assert_eq!(a.dim, 1);
    }

    #[test]
    fn nondominant_node_gives_zero() {
        let k = rat_int(1);
        let li = crate::coinv::integrable_marked(2, FinRep::Fund, &k, 3).unwrap();
        let sites = vec![
            Site {
                location: Location::Zero,
                module: GradedModule::verma(
                    2,
                    Side::Zero,
                    &AffineWeight::new(k.clone(), vec![rat(1, 3), rat(-1, 3)]),
                    3,
                )
                .unwrap(),
            },
            marked(3, &li),
            Site {
                location: Location::Infinity,
                module: GradedModule::verma(2, Side::Infinity, &AffineWeight::new(k, vec![rat(-5, 6), rat(5, 6)]), 3)
                    .unwrap(),
            },
        ];
        let r = CoinvProblem::new(2, Model::Orb, sites).unwrap().cc_dim(3).unwrap();
        assert!(r.stabilized);
        assert_eq!(r.dim, 0);
        assert!(r.levels.iter().all(|l| l.columns > 0));
    }

    #[test]
    fn rejects_bad_input() {
        let m = GradedModule::weyl(2, FinRep::Fund, &rat_int(1), 2).unwrap();
        assert!(CoinvProblem::new(2, Model::Trig, vec![marked(3, &m), marked(-3, &m)]).is_err());
        let z = GradedModule::verma(2, Side::Zero, &AffineWeight::zero(2, rat_int(1)), 2).unwrap();
        assert!(CoinvProblem::new(2, Model::Trig, vec![Site { location: Location::Zero, module: z }]).is_err());
        let mut p = CoinvProblem::new(2, Model::Trig, vec![marked(3, &m)]).unwrap();
        assert!(p.cc_dim(0).is_err());
        assert!(matches!(p.corank(3, 3), Err(Error::Truncation(_))));
    }
}
