//! Memory contexts: ordered cell bindings, reachability, garbage and
//! comparison up to renaming of cells.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use indexmap::IndexMap;

use crate::error::ParseError;
use crate::sexp::{self, Sexp};
use crate::syntax::{alpha_equal_with, build, from_sexp, name_from_sexp, Context, ContextSort, Expr, Name};

/// Γ: cell names bound to value contents, in allocation order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Memory {
    cells: IndexMap<Name, Expr>,
}

impl Memory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, z: &str) -> bool {
        self.cells.contains_key(z)
    }

    pub fn get(&self, z: &str) -> Option<&Expr> {
        self.cells.get(z)
    }

    /// Binds `z`, or overwrites its contents in place if already bound.
    pub fn insert(&mut self, z: impl Into<Name>, v: Expr) {
        self.cells.insert(z.into(), v);
    }

    /// Overwrites an existing cell. Returns false if `z` is unbound.
    pub fn set(&mut self, z: &str, v: Expr) -> bool {
        match self.cells.get_mut(z) {
            Some(slot) => {
                *slot = v;
                true
            }
            None => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Expr)> {
        self.cells.iter()
    }

    pub fn names(&self) -> impl Iterator<Item = &Name> {
        self.cells.keys()
    }

    pub fn domain(&self) -> BTreeSet<Name> {
        self.cells.keys().cloned().collect()
    }

    /// The first of z0, z1, ... not bound here and not rejected by `reserved`.
    pub fn fresh_cell(&self, start: usize, reserved: &dyn Fn(&str) -> bool) -> (Name, usize) {
        let mut k = start;
        loop {
            let z = format!("z{k}");
            if !self.contains(&z) && !reserved(&z) {
                return (z, k + 1);
            }
            k += 1;
        }
    }

    /// Parses `(memory (z0 nil) (z1 z0) ...)`.
    pub fn parse(text: &str) -> Result<Memory, ParseError> {
        Memory::from_sexp(&sexp::read_one(text)?)
    }

    pub fn from_sexp(s: &Sexp) -> Result<Memory, ParseError> {
        let items = match s {
            Sexp::List(items, _) if s.head() == Some("memory") => &items[1..],
            _ => return Err(ParseError::at(s.pos(), "expected (memory (cell value) ...)")),
        };
        let mut m = Memory::new();
        for it in items {
            let pair = it
                .as_list()
                .filter(|l| l.len() == 2)
                .ok_or_else(|| ParseError::at(it.pos(), "expected (cell value)"))?;
            let z = name_from_sexp(&pair[0])?;
            if m.contains(&z) {
                return Err(ParseError::at(pair[0].pos(), format!("cell `{z}` bound twice")));
            }
            m.insert(z, from_sexp(&pair[1])?);
        }
        for (z, v) in m.iter() {
            if !v.is_value_with(&|x| m.contains(x)) {
                return Err(ParseError::at(s.pos(), format!("contents of `{z}` must be a value: {v}")));
            }
            if let Some(x) = v.free_vars().into_iter().find(|x| !m.contains(x)) {
                return Err(ParseError::at(s.pos(), format!("contents of `{z}` mention unbound `{x}`")));
            }
        }
        Ok(m)
    }

    /// Surface form accepted by [`Memory::parse`].
    pub fn to_sexp_string(&self) -> String {
        let mut s = String::from("(memory");
        for (z, v) in self.iter() {
            s.push_str(&format!(" ({z} {v})"));
        }
        s.push(')');
        s
    }
}

impl fmt::Display for Memory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (z, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{z}:={v}")?;
        }
        f.write_str("}")
    }
}

impl FromIterator<(Name, Expr)> for Memory {
    fn from_iter<I: IntoIterator<Item = (Name, Expr)>>(iter: I) -> Self {
        Memory {
            cells: iter.into_iter().collect(),
        }
    }
}

/// Roots for reachability: named cells plus an optional result value.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RootSet {
    pub cells: BTreeSet<Name>,
    pub value: Option<Expr>,
}

impl RootSet {
    pub fn cells<I, S>(cells: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<Name>,
    {
        RootSet {
            cells: cells.into_iter().map(Into::into).collect(),
            value: None,
        }
    }

    pub fn with_value(mut self, v: Expr) -> Self {
        self.value = Some(v);
        self
    }

    pub fn all(m: &Memory) -> Self {
        RootSet::cells(m.names().cloned())
    }
}

/// Cells reachable from the roots through contents, including cell names
/// captured by lambdas.
pub fn reachable(m: &Memory, roots: &RootSet) -> BTreeSet<Name> {
    let mut seen = BTreeSet::new();
    let mut work: Vec<Name> = roots.cells.iter().filter(|z| m.contains(z)).cloned().collect();
    if let Some(v) = &roots.value {
        work.extend(v.free_vars().into_iter().filter(|z| m.contains(z)));
    }
    while let Some(z) = work.pop() {
        if !seen.insert(z.clone()) {
            continue;
        }
        if let Some(v) = m.get(&z) {
            work.extend(v.free_vars().into_iter().filter(|x| m.contains(x) && !seen.contains(x)));
        }
    }
    seen
}

/// Restriction to reachable cells, keeping allocation order.
pub fn gc(m: &Memory, roots: &RootSet) -> Memory {
    let keep = reachable(m, roots);
    m.iter()
        .filter(|(z, _)| keep.contains(*z))
        .map(|(z, v)| (z.clone(), v.clone()))
        .collect()
}

struct Iso {
    fwd: BTreeMap<Name, Name>,
    bwd: BTreeMap<Name, Name>,
    queue: VecDeque<(Name, Name)>,
}

/// Strong isomorphism of final states: the parts of `m0`/`m1` reachable from
/// `roots` and the respective values are related by a bijection fixing the
/// roots, under which `v0` and `v1` and all contents correspond.
///
/// The bijection is forced by a lockstep walk from the roots, so no search is
/// needed.
pub fn equal_mod_garbage(m0: &Memory, v0: &Expr, m1: &Memory, v1: &Expr, roots: &BTreeSet<Name>) -> bool {
    let st = RefCell::new(Iso {
        fwd: BTreeMap::new(),
        bwd: BTreeMap::new(),
        queue: VecDeque::new(),
    });
    {
        let mut s = st.borrow_mut();
        for r in roots {
            match (m0.contains(r), m1.contains(r)) {
                (true, true) => {
                    s.fwd.insert(r.clone(), r.clone());
                    s.bwd.insert(r.clone(), r.clone());
                    s.queue.push_back((r.clone(), r.clone()));
                }
                (false, false) => {}
                _ => return false,
            }
        }
    }
    let mut relate = |x: &str, y: &str| -> bool {
        let (cx, cy) = (m0.contains(x), m1.contains(y));
        if !cx && !cy {
            return x == y;
        }
        if cx != cy {
            return false;
        }
        let mut s = st.borrow_mut();
        match (s.fwd.get(x), s.bwd.get(y)) {
            (Some(y2), _) => y2 == y,
            (None, Some(_)) => false,
            (None, None) => {
                if roots.contains(x) || roots.contains(y) {
                    return false;
                }
                s.fwd.insert(x.to_string(), y.to_string());
                s.bwd.insert(y.to_string(), x.to_string());
                s.queue.push_back((x.to_string(), y.to_string()));
                true
            }
        }
    };
    if !alpha_equal_with(v0, v1, &mut relate) {
        return false;
    }
    loop {
        let next = st.borrow_mut().queue.pop_front();
        let Some((x, y)) = next else { return true };
        let (Some(c0), Some(c1)) = (m0.get(&x), m1.get(&y)) else {
            return false;
        };
        if !alpha_equal_with(c0, c1, &mut relate) {
            return false;
        }
    }
}

/// Alpha-equality of whole memories: the i-th cells correspond.
pub fn alpha_equal_memory(m0: &Memory, m1: &Memory) -> bool {
    if m0.len() != m1.len() {
        return false;
    }
    let map: BTreeMap<&str, &str> = m0.names().map(String::as_str).zip(m1.names().map(String::as_str)).collect();
    let mut relate = |x: &str, y: &str| match map.get(x) {
        Some(y2) => *y2 == y,
        None => x == y && !m1.contains(y),
    };
    m0.iter()
        .zip(m1.iter())
        .all(|((_, a), (_, b))| alpha_equal_with(a, b, &mut relate))
}

/// `let{z0 := mk(nil)} ... seq(set(z0, v0), ..., •)`; the empty memory is `•`.
pub fn canonicalize(m: &Memory) -> Context {
    if m.is_empty() {
        return Context::hole().with_sort(ContextSort::Univalent);
    }
    let mut body: Vec<Expr> = m.iter().map(|(z, v)| build::set(build::var(z), v.clone())).collect();
    body.push(Expr::Hole);
    let mut term = Expr::Seq(body);
    for (z, _) in m.iter().collect::<Vec<_>>().into_iter().rev() {
        term = build::let_(z, build::mk(build::nil()), term);
    }
    Context::new(term, ContextSort::Univalent)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::build::*;

    fn mem(text: &str) -> Memory {
        Memory::parse(text).unwrap()
    }

    #[test]
    fn reachability() {
        let m = mem("(memory (z0 z1) (z1 nil))");
        assert_eq!(reachable(&m, &RootSet::cells(["z0"])).len(), 2);
        let m = mem("(memory (z0 z0))");
        assert_eq!(reachable(&m, &RootSet::cells(["z0"])), BTreeSet::from(["z0".to_string()]));
        let m = mem("(memory (z0 nil) (z1 nil))");
        assert_eq!(reachable(&m, &RootSet::cells(["z0"])), BTreeSet::from(["z0".to_string()]));
        let m = mem("(memory (z0 nil) (z1 (lambda (x) (get z0))))");
        assert_eq!(reachable(&m, &RootSet::default().with_value(var("z1"))).len(), 2);
    }

    #[test]
    fn gc_keeps_order_and_is_idempotent() {
        let m = mem("(memory (z0 nil) (z1 z3) (z2 t) (z3 nil))");
        let r = RootSet::cells(["z1"]);
        let g = gc(&m, &r);
        assert_eq!(g.names().cloned().collect::<Vec<_>>(), vec!["z1", "z3"]);
        assert_eq!(gc(&g, &r), g);
        assert_eq!(gc(&m, &RootSet::all(&m)), m);
    }

    #[test]
    fn iso_modulo_garbage() {
        let a = mem("(memory (z0 nil) (z1 z1))");
        let b = mem("(memory (z0 nil) (z7 t) (z5 z5))");
        let roots = BTreeSet::from(["z0".to_string()]);
        assert!(equal_mod_garbage(&a, &var("z1"), &b, &var("z5"), &roots));
        assert!(!equal_mod_garbage(&a, &var("z1"), &b, &var("z7"), &roots));
        let c = mem("(memory (z0 t))");
        let d = mem("(memory (z0 nil))");
        let roots = BTreeSet::from(["z0".to_string()]);
        assert!(!equal_mod_garbage(&c, &nil(), &d, &nil(), &roots));
        // roots may not be renamed
        let e = mem("(memory (z0 nil) (z1 nil))");
        let roots = BTreeSet::from(["z0".to_string(), "z1".to_string()]);
        assert!(!equal_mod_garbage(&e, &var("z0"), &e, &var("z1"), &roots));
    }

    #[test]
    fn iso_through_lambdas() {
        let a = mem("(memory (z1 0))");
        let b = mem("(memory (z4 0))");
        let f0 = lam("x", seq(vec![set(var("z1"), var("x")), get(var("z1"))]));
        let f1 = lam("y", seq(vec![set(var("z4"), var("y")), get(var("z4"))]));
        assert!(equal_mod_garbage(&a, &f0, &b, &f1, &BTreeSet::new()));
    }

    #[test]
    fn canonical_form() {
        let m = mem("(memory (z0 z0))");
        assert_eq!(
            canonicalize(&m).term(),
            &let_("z0", mk(nil()), seq(vec![set(var("z0"), var("z0")), hole()]))
        );
        assert!(canonicalize(&Memory::new()).is_hole());
    }

    #[test]
    fn literal_round_trip() {
        let m = mem("(memory (z0 nil) (z1 z0))");
        assert_eq!(m.to_string(), "{z0:=nil, z1:=z0}");
        assert_eq!(Memory::parse(&m.to_sexp_string()).unwrap(), m);
        assert!(Memory::parse("(memory (z0 z9))").is_err());
        assert!(Memory::parse("(memory (z0 (get z0)))").is_err());
        assert!(Memory::parse("(memory (z0 nil) (z0 t))").is_err());
    }

    #[test]
    fn memory_alpha() {
        let a = mem("(memory (z0 nil) (z1 z0))");
        let b = mem("(memory (z5 nil) (z2 z5))");
        let c = mem("(memory (z5 nil) (z2 z2))");
        assert!(alpha_equal_memory(&a, &b));
        assert!(!alpha_equal_memory(&a, &c));
    }
}
