use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::expr::{Expr, Name};

/// A finite map from variables to (value) expressions, applied simultaneously.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    map: BTreeMap<Name, Expr>,
}

impl Substitution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn singleton(x: impl Into<Name>, v: Expr) -> Self {
        let mut s = Self::new();
        s.insert(x, v);
        s
    }

    pub fn insert(&mut self, x: impl Into<Name>, v: Expr) -> Option<Expr> {
        self.map.insert(x.into(), v)
    }

    pub fn get(&self, x: &str) -> Option<&Expr> {
        self.map.get(x)
    }

    pub fn contains(&self, x: &str) -> bool {
        self.map.contains_key(x)
    }

    pub fn remove(&mut self, x: &str) -> Option<Expr> {
        self.map.remove(x)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Name, &Expr)> {
        self.map.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &Name> {
        self.map.keys()
    }

    /// Free variables of the range.
    pub fn range_free_vars(&self) -> BTreeSet<Name> {
        self.map.values().flat_map(|v| v.free_vars()).collect()
    }

    /// Entries of `other` override entries of `self`.
    pub fn extended(&self, other: &Substitution) -> Substitution {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.insert(k.clone(), v.clone());
        }
        out
    }

    pub fn apply(&self, e: &Expr) -> Expr {
        substitute(e, self)
    }
}

impl FromIterator<(Name, Expr)> for Substitution {
    fn from_iter<I: IntoIterator<Item = (Name, Expr)>>(iter: I) -> Self {
        Substitution {
            map: iter.into_iter().collect(),
        }
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(subst")?;
        for (k, v) in &self.map {
            write!(f, " ({k} {v})")?;
        }
        f.write_str(")")
    }
}

/// A name derived from `base` that `taken` rejects: `y`, then `y'`, `y'2`, ...
pub fn fresh_name(base: &str, taken: &dyn Fn(&str) -> bool) -> Name {
    let stem = base.split('\'').next().unwrap_or(base);
    let stem = if stem.is_empty() { "v" } else { stem };
    let first = format!("{stem}'");
    if !taken(&first) {
        return first;
    }
    (2..)
        .map(|i| format!("{stem}'{i}"))
        .find(|n| !taken(n))
        .expect("unbounded name supply")
}

/// Capture-avoiding simultaneous substitution. Holes are left in place.
pub fn substitute(e: &Expr, s: &Substitution) -> Expr {
    if s.is_empty() {
        return e.clone();
    }
    let entries: Vec<(Name, Expr)> = s.iter().map(|(k, v)| (k.clone(), v.clone())).collect();
    let mut avoid = s.range_free_vars();
    subst_in(e, &entries, &mut avoid)
}

/// `e[x := v]`.
pub fn subst1(e: &Expr, x: &str, v: &Expr) -> Expr {
    let entries = vec![(x.to_string(), v.clone())];
    let mut avoid = v.free_vars();
    subst_in(e, &entries, &mut avoid)
}

fn lookup<'a>(entries: &'a [(Name, Expr)], x: &str) -> Option<&'a Expr> {
    entries.iter().rev().find(|(k, _)| k == x).map(|(_, v)| v)
}

/// Prepares the substitution for the scope of binder `b` over `bodies`.
/// Returns the (possibly renamed) binder and the substitution to use inside.
fn enter_binder(
    b: &Name,
    bodies: &[&Expr],
    entries: &[(Name, Expr)],
    avoid: &mut BTreeSet<Name>,
) -> (Name, Option<Vec<(Name, Expr)>>) {
    let mut inner: Vec<(Name, Expr)> = entries.iter().filter(|(k, _)| k != b).cloned().collect();
    // Only entries whose variable occurs free below matter.
    inner.retain(|(k, _)| bodies.iter().any(|body| body.has_free(k)));
    if inner.is_empty() {
        return (b.clone(), None);
    }
    if !avoid.contains(b) {
        return (b.clone(), Some(inner));
    }
    let mut used = avoid.clone();
    for body in bodies {
        body.all_names(&mut used);
    }
    for (k, _) in &inner {
        used.insert(k.clone());
    }
    let renamed = fresh_name(b, &|n| used.contains(n));
    avoid.insert(renamed.clone());
    inner.push((b.clone(), Expr::Var(renamed.clone())));
    (renamed, Some(inner))
}

fn subst_in(e: &Expr, entries: &[(Name, Expr)], avoid: &mut BTreeSet<Name>) -> Expr {
    match e {
        Expr::Var(x) => lookup(entries, x).cloned().unwrap_or_else(|| e.clone()),
        Expr::Nil | Expr::T | Expr::Nat(_) | Expr::Event(_) | Expr::Hole => e.clone(),
        Expr::Lambda(x, body) => {
            let (x2, inner) = enter_binder(x, &[body], entries, avoid);
            match inner {
                None => e.clone(),
                Some(inner) => Expr::Lambda(x2, Box::new(subst_in(body, &inner, avoid))),
            }
        }
        Expr::Let(x, bound, body) => {
            let bound2 = subst_in(bound, entries, avoid);
            let (x2, inner) = enter_binder(x, &[body], entries, avoid);
            let body2 = match inner {
                None => (**body).clone(),
                Some(inner) => subst_in(body, &inner, avoid),
            };
            Expr::Let(x2, Box::new(bound2), Box::new(body2))
        }
        Expr::LetActor(x, b, body) => {
            let (x2, inner) = enter_binder(x, &[b, body], entries, avoid);
            match inner {
                None => e.clone(),
                Some(inner) => Expr::LetActor(
                    x2,
                    Box::new(subst_in(b, &inner, avoid)),
                    Box::new(subst_in(body, &inner, avoid)),
                ),
            }
        }
        Expr::App(f, a) => Expr::App(
            Box::new(subst_in(f, entries, avoid)),
            Box::new(subst_in(a, entries, avoid)),
        ),
        Expr::If(c, t, f) => Expr::If(
            Box::new(subst_in(c, entries, avoid)),
            Box::new(subst_in(t, entries, avoid)),
            Box::new(subst_in(f, entries, avoid)),
        ),
        Expr::Seq(es) => Expr::Seq(es.iter().map(|x| subst_in(x, entries, avoid)).collect()),
        Expr::Prim(op, es) => Expr::Prim(*op, es.iter().map(|x| subst_in(x, entries, avoid)).collect()),
    }
}

/// Replaces free occurrences of names without any capture checks. Used to
/// rename cells and actors through a bijection whose targets are fresh.
pub fn rename_free(e: &Expr, rename: &dyn Fn(&str) -> Option<Name>) -> Expr {
    let s: Substitution = e
        .free_vars()
        .into_iter()
        .filter_map(|x| rename(&x).map(|y| (x, Expr::Var(y))))
        .collect();
    substitute(e, &s)
}
