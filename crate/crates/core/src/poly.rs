//! Sparse polynomials over the prime field, keyed by per-variable exponent
//! vectors. Read-once pipelines only ever produce multilinear polynomials; the
//! general exponents exist for the coefficient-matrix generalization and its
//! tests.

use std::collections::HashMap;
use std::fmt::Write as _;

use smallvec::SmallVec;
use thiserror::Error;

use crate::field::Field;
use crate::formula::{Formula, Node, Var};
use crate::partition::{Partition, PartitionError, Target};

/// Exponent vector aligned with the owning polynomial's roster.
pub type Mono = SmallVec<[u8; 24]>;

/// Default cap on stored terms during expansion and multiplication.
pub const DEFAULT_TERM_CAP: usize = 1 << 22;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PolyError {
    #[error("term count exceeded the cap of {cap}")]
    TermBlowup { cap: usize },
    #[error("exponent overflow (more than 255 on one variable)")]
    ExponentOverflow,
    #[error("operands live over different fields")]
    FieldMismatch,
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

#[derive(Debug, Clone)]
pub struct SparsePoly {
    field: Field,
    roster: Vec<Var>,
    terms: HashMap<Mono, u64>,
}

impl PartialEq for SparsePoly {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.roster == other.roster && self.terms == other.terms
    }
}

impl SparsePoly {
    pub fn zero(field: Field) -> SparsePoly {
        SparsePoly { field, roster: Vec::new(), terms: HashMap::new() }
    }

    pub fn constant(field: Field, c: u64) -> SparsePoly {
        let mut p = SparsePoly::zero(field);
        let c = field.from_u64(c);
        if c != 0 {
            p.terms.insert(Mono::new(), c);
        }
        p
    }

    pub fn variable(field: Field, v: Var) -> SparsePoly {
        let mut p = SparsePoly { field, roster: vec![v], terms: HashMap::new() };
        p.terms.insert(SmallVec::from_slice(&[1]), 1);
        p
    }

    /// Builds a polynomial from `(sparse exponent list, coefficient)` pairs.
    pub fn from_terms(
        field: Field,
        terms: impl IntoIterator<Item = (Vec<(Var, u8)>, u64)>,
    ) -> SparsePoly {
        let mut acc = SparsePoly::zero(field);
        for (mono, coeff) in terms {
            let mut one = SparsePoly::constant(field, coeff);
            for (v, e) in mono {
                let mut t = HashMap::new();
                t.insert(SmallVec::from_slice(&[e]), 1u64);
                let pv = SparsePoly { field, roster: vec![v], terms: t };
                one = one.mul_capped(&pv, DEFAULT_TERM_CAP).expect("tiny");
            }
            acc = acc.add(&one);
        }
        acc
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn roster(&self) -> &[Var] {
        &self.roster
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mono: &[(Var, u8)]) -> u64 {
        let mut key: Mono = SmallVec::from_elem(0, self.roster.len());
        for (v, e) in mono {
            match self.roster.binary_search(v) {
                Ok(i) => key[i] = *e,
                Err(_) => {
                    if *e != 0 {
                        return 0;
                    }
                }
            }
        }
        self.terms.get(&key).copied().unwrap_or(0)
    }

    /// Iterates `(exponents aligned to roster, coefficient)` in arbitrary order.
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, u64)> + '_ {
        self.terms.iter().map(|(m, &c)| (m, c))
    }

    /// Sorted copy of the term list for deterministic output.
    pub fn sorted_terms(&self) -> Vec<(Mono, u64)> {
        let mut v: Vec<(Mono, u64)> = self.terms.iter().map(|(m, &c)| (m.clone(), c)).collect();
        v.sort();
        v
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e <= 1))
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|m| m.iter().map(|&e| e as usize).sum())
            .max()
            .unwrap_or(0)
    }

    /// Y-side of the roster.
    pub fn y_roster(&self) -> Vec<Var> {
        self.roster.iter().copied().filter(|v| matches!(v, Var::Y(_))).collect()
    }

    /// Z-side of the roster.
    pub fn z_roster(&self) -> Vec<Var> {
        self.roster.iter().copied().filter(|v| matches!(v, Var::Z(_))).collect()
    }

    fn remap(&self, roster: &[Var]) -> Vec<usize> {
        self.roster
            .iter()
            .map(|v| roster.binary_search(v).expect("roster is a superset"))
            .collect()
    }

    fn with_roster(&self, roster: &[Var]) -> SparsePoly {
        if self.roster == roster {
            return self.clone();
        }
        let map = self.remap(roster);
        let mut terms = HashMap::with_capacity(self.terms.len());
        for (m, &c) in &self.terms {
            let mut key: Mono = SmallVec::from_elem(0, roster.len());
            for (i, &e) in m.iter().enumerate() {
                key[map[i]] = e;
            }
            terms.insert(key, c);
        }
        SparsePoly { field: self.field, roster: roster.to_vec(), terms }
    }

    fn union_roster(&self, other: &SparsePoly) -> Vec<Var> {
        let mut r: Vec<Var> = self.roster.iter().chain(other.roster.iter()).copied().collect();
        r.sort_unstable();
        r.dedup();
        r
    }

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        assert_eq!(self.field, other.field, "field mismatch");
        let roster = self.union_roster(other);
        let mut a = self.with_roster(&roster);
        let b = other.with_roster(&roster);
        for (m, c) in b.terms {
            let e = a.terms.entry(m).or_insert(0);
            *e = self.field.add(*e, c);
        }
        a.terms.retain(|_, c| *c != 0);
        a
    }

    pub fn scale(&self, k: u64) -> SparsePoly {
        let k = self.field.from_u64(k);
        let mut out = self.clone();
        if k == 0 {
            out.terms.clear();
            return out;
        }
        for c in out.terms.values_mut() {
            *c = self.field.mul(*c, k);
        }
        out
    }

    pub fn mul_capped(&self, other: &SparsePoly, cap: usize) -> Result<SparsePoly, PolyError> {
        assert_eq!(self.field, other.field, "field mismatch");
        let roster = self.union_roster(other);
        let a = self.with_roster(&roster);
        let b = other.with_roster(&roster);
        let (small, large) = if a.terms.len() <= b.terms.len() { (&a, &b) } else { (&b, &a) };
        let mut terms: HashMap<Mono, u64> =
            HashMap::with_capacity(small.terms.len().saturating_mul(large.terms.len()).min(cap));
        for (m1, &c1) in &small.terms {
            for (m2, &c2) in &large.terms {
                let mut key: Mono = SmallVec::with_capacity(roster.len());
                for (&e1, &e2) in m1.iter().zip(m2.iter()) {
                    let e = e1.checked_add(e2).ok_or(PolyError::ExponentOverflow)?;
                    key.push(e);
                }
                let c = self.field.mul(c1, c2);
                let slot = terms.entry(key).or_insert(0);
                *slot = self.field.add(*slot, c);
                if terms.len() > cap {
                    return Err(PolyError::TermBlowup { cap });
                }
            }
        }
        terms.retain(|_, c| *c != 0);
        Ok(SparsePoly { field: self.field, roster, terms })
    }

    pub fn eval(&self, point: &dyn Fn(Var) -> u64) -> u64 {
        let vals: Vec<u64> = self.roster.iter().map(|&v| point(v) % self.field.prime()).collect();
        let mut acc = 0u64;
        for (m, &c) in &self.terms {
            let mut t = c;
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    t = self.field.mul(t, self.field.pow(vals[i], e as u64));
                }
            }
            acc = self.field.add(acc, t);
        }
        acc
    }

    /// Substitutes each input variable by its partition target; Y/Z variables
    /// already in the roster are left alone.
    pub fn apply_partition(&self, phi: &Partition) -> Result<SparsePoly, PolyError> {
        let mut sub: Vec<Option<Target>> = Vec::with_capacity(self.roster.len());
        for &v in &self.roster {
            match v {
                Var::X(_) => sub.push(Some(phi.target(v)?)),
                _ => sub.push(None),
            }
        }
        let mut new_roster: Vec<Var> = Vec::new();
        for (i, &v) in self.roster.iter().enumerate() {
            match sub[i] {
                None => new_roster.push(v),
                Some(Target::Y(k)) => new_roster.push(Var::Y(k)),
                Some(Target::Z(k)) => new_roster.push(Var::Z(k)),
                Some(_) => {}
            }
        }
        new_roster.sort_unstable();
        new_roster.dedup();
        let pos: HashMap<Var, usize> =
            new_roster.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut terms: HashMap<Mono, u64> = HashMap::with_capacity(self.terms.len());
        'term: for (m, &c) in &self.terms {
            let mut key: Mono = SmallVec::from_elem(0, new_roster.len());
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match sub[i] {
                    None => key[pos[&self.roster[i]]] += e,
                    Some(Target::Y(k)) => key[pos[&Var::Y(k)]] += e,
                    Some(Target::Z(k)) => key[pos[&Var::Z(k)]] += e,
                    Some(Target::One) => {}
                    Some(Target::Zero) => continue 'term,
                }
            }
            let slot = terms.entry(key).or_insert(0);
            *slot = self.field.add(*slot, c);
        }
        terms.retain(|_, c| *c != 0);
        Ok(SparsePoly { field: self.field, roster: new_roster, terms })
    }

    /// One term per line: `coeff y-mask z-mask e1 e2 ...`, preceded by a JSON
    /// header carrying the prime and the roster. Consumed by oracle scripts.
    pub fn dump(&self) -> String {
        let names: Vec<String> = self.roster.iter().map(|v| v.to_string()).collect();
        let mut out = String::new();
        let header = serde_json::json!({ "prime": self.field.prime(), "roster": names });
        out.push_str(&header.to_string());
        out.push('\n');
        for (m, c) in self.sorted_terms() {
            let (mut ymask, mut zmask) = (0u64, 0u64);
            for (i, &e) in m.iter().enumerate() {
                if e > 0 {
                    match self.roster[i] {
                        Var::Y(_) => ymask |= 1 << i,
                        Var::Z(_) => zmask |= 1 << i,
                        Var::X(_) => {}
                    }
                }
            }
            write!(out, "{c} {ymask:#x} {zmask:#x}").unwrap();
            for e in &m {
                write!(out, " {e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Expands a formula to its polynomial, folding constants eagerly at every
/// gate. Errors out when the running term count passes `cap`.
pub fn expand(f: &Formula, field: Field, cap: usize) -> Result<SparsePoly, PolyError> {
    let mut slots: Vec<Option<SparsePoly>> = vec![None; f.nodes().len()];
    for (i, n) in f.nodes().iter().enumerate() {
        let p = match *n {
            Node::Var(v) => SparsePoly::variable(field, v),
            Node::Const(c) => SparsePoly::constant(field, c),
            Node::Add(l, r) => {
                let a = slots[l as usize].take().unwrap();
                let b = slots[r as usize].take().unwrap();
                a.add(&b)
            }
            Node::Mul(l, r) => {
                let a = slots[l as usize].take().unwrap();
                let b = slots[r as usize].take().unwrap();
                a.mul_capped(&b, cap)?
            }
        };
        slots[i] = Some(p);
    }
    Ok(slots[f.root() as usize].take().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{parse_formula, random_rof, RofGenConfig, VarId};
    use crate::partition::sample_d_prime;
    use crate::rng::trial_rng;
    use rand::Rng;

    fn field() -> Field {
        Field::default()
    }

    fn expand_text(text: &str) -> SparsePoly {
        expand(&parse_formula(text, field()).unwrap(), field(), DEFAULT_TERM_CAP).unwrap()
    }

    #[test]
    fn disjoint_product_expands() {
        let p = expand_text("(* (+ y1 z1) (+ y2 z2))");
        assert_eq!(p.num_terms(), 4);
        assert_eq!(p.coeff(&[(Var::Y(1), 1), (Var::Y(2), 1)]), 1);
        assert_eq!(p.coeff(&[(Var::Y(1), 1), (Var::Z(2), 1)]), 1);
        assert_eq!(p.coeff(&[(Var::Z(1), 1), (Var::Y(2), 1)]), 1);
        assert_eq!(p.coeff(&[(Var::Z(1), 1), (Var::Z(2), 1)]), 1);
    }

    #[test]
    fn constants_fold() {
        let p = expand_text("(+ (* 0 y1) 1)");
        assert_eq!(p.num_terms(), 1);
        assert_eq!(p.coeff(&[]), 1);
    }

    #[test]
    fn add_identity_and_square() {
        let p = expand_text("(+ y1 1)");
        assert_eq!(p.add(&SparsePoly::zero(field())), p);
        let sq = p.mul_capped(&p, DEFAULT_TERM_CAP).unwrap();
        assert_eq!(sq.coeff(&[(Var::Y(1), 2)]), 1);
        assert_eq!(sq.coeff(&[(Var::Y(1), 1)]), 2);
        assert_eq!(sq.coeff(&[]), 1);
        assert!(!sq.is_multilinear());
        assert!(p.is_multilinear());
    }

    #[test]
    fn term_cap_enforced() {
        let f = parse_formula("(* (+ y1 z1) (+ y2 z2) (+ y3 z3))", field()).unwrap();
        assert_eq!(expand(&f, field(), 7).unwrap_err(), PolyError::TermBlowup { cap: 7 });
    }

    #[test]
    fn mul_matches_evaluation_oracle() {
        let mut rng = trial_rng(3, 1);
        for _ in 0..20 {
            let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                let terms: Vec<(Vec<(Var, u8)>, u64)> = (0..20)
                    .map(|_| {
                        let mono: Vec<(Var, u8)> = (1..=4u32)
                            .flat_map(|i| {
                                let e = rng.gen_range(0..2u8);
                                let side: Var =
                                    if rng.gen_bool(0.5) { Var::Y(i) } else { Var::Z(i) };
                                if e > 0 { Some((side, e)) } else { None }
                            })
                            .collect();
                        (mono, field().rand_elem(rng))
                    })
                    .collect();
                SparsePoly::from_terms(field(), terms)
            };
            let p = mk(&mut rng);
            let q = mk(&mut rng);
            let prod = p.mul_capped(&q, DEFAULT_TERM_CAP).unwrap();
            for _ in 0..50 {
                let vals: std::collections::HashMap<Var, u64> = prod
                    .roster()
                    .iter()
                    .chain(p.roster())
                    .chain(q.roster())
                    .map(|&v| (v, field().rand_elem(&mut rng)))
                    .collect();
                let at = |v: Var| vals.get(&v).copied().unwrap_or(0);
                assert_eq!(prod.eval(&at), field().mul(p.eval(&at), q.eval(&at)));
            }
        }
    }

    #[test]
    fn rof_expansions_are_multilinear_and_match_eval() {
        let mut rng = trial_rng(4, 2);
        for t in 0..200 {
            let n = 1 + (t % 12);
            let f = random_rof(RofGenConfig { num_vars: n, constant_prob: 0.2 }, field(), &mut rng);
            let phi = sample_d_prime(f.universe(), t as u64);
            let fp = crate::partition::apply_partition(&f, &phi).unwrap();
            let poly = expand(&fp, field(), DEFAULT_TERM_CAP).unwrap();
            assert!(poly.is_multilinear());
            for _ in 0..20 {
                let vals: std::collections::HashMap<Var, u64> = fp
                    .universe()
                    .iter()
                    .map(|&v| (v, field().rand_elem(&mut rng)))
                    .collect();
                let at = |v: Var| vals[&v];
                assert_eq!(poly.eval(&at), fp.eval(field(), &at));
            }
        }
    }

    #[test]
    fn expand_distributes_over_product_split() {
        let mut rng = trial_rng(5, 5);
        for _ in 0..40 {
            let f = random_rof(RofGenConfig { num_vars: 5, constant_prob: 0.1 }, field(), &mut rng);
            let g = random_rof(RofGenConfig { num_vars: 4, constant_prob: 0.1 }, field(), &mut rng);
            // g over shifted variables to stay disjoint
            let g_text = g.to_text().replace('x', "x10");
            let g = parse_formula(&g_text, field()).unwrap();
            let prod_text = format!("(* {} {})", f.to_text(), g.to_text());
            let prod = parse_formula(&prod_text, field()).unwrap();
            let lhs = expand(&prod, field(), DEFAULT_TERM_CAP).unwrap();
            let rhs = expand(&f, field(), DEFAULT_TERM_CAP)
                .unwrap()
                .mul_capped(&expand(&g, field(), DEFAULT_TERM_CAP).unwrap(), DEFAULT_TERM_CAP)
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn partition_substitution_on_poly() {
        use crate::partition::{Partition, Target};
        // x1*x2 + x3 with x1->y1, x2->1, x3->0 gives y1
        let p = SparsePoly::from_terms(
            field(),
            vec![
                (vec![(Var::X(VarId::Plain(1)), 1), (Var::X(VarId::Plain(2)), 1)], 1),
                (vec![(Var::X(VarId::Plain(3)), 1)], 1),
            ],
        );
        let phi = Partition::explicit(vec![
            (Var::X(VarId::Plain(1)), Target::Y(1)),
            (Var::X(VarId::Plain(2)), Target::One),
            (Var::X(VarId::Plain(3)), Target::Zero),
        ])
        .unwrap();
        let q = p.apply_partition(&phi).unwrap();
        assert_eq!(q.num_terms(), 1);
        assert_eq!(q.coeff(&[(Var::Y(1), 1)]), 1);
    }

    #[test]
    fn dump_is_deterministic() {
        let p = expand_text("(* (+ y1 z1) (+ y2 z2))");
        assert_eq!(p.dump(), p.dump());
        assert!(p.dump().starts_with('{'));
        assert_eq!(p.dump().lines().count(), 5);
    }
}
