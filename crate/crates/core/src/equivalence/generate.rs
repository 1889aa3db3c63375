//! Seeded random terms for law instances and property tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::memory::Memory;
use crate::reducer::Description;
use crate::syntax::build::*;
use crate::syntax::{Context, ContextSort, Expr, Name};

pub struct Gen {
    rng: ChaCha8Rng,
    fresh: usize,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen {
            rng: ChaCha8Rng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn binder(&mut self) -> Name {
        self.fresh += 1;
        format!("g{}", self.fresh)
    }

    fn pick<'a, T>(&mut self, xs: &'a [T]) -> &'a T {
        &xs[self.rng.gen_range(0..xs.len())]
    }

    pub fn atom(&mut self) -> Expr {
        match self.rng.gen_range(0..5) {
            0 => nil(),
            1 => t(),
            n => nat(n as u64 - 2),
        }
    }

    fn leaf(&mut self, scope: &[Name]) -> Expr {
        if !scope.is_empty() && self.rng.gen_bool(0.5) {
            var(self.pick(scope))
        } else {
            self.atom()
        }
    }

    /// A syntactic value whose free variables are in `scope`.
    pub fn value(&mut self, depth: usize, scope: &[Name]) -> Expr {
        if depth == 0 {
            return self.leaf(scope);
        }
        match self.rng.gen_range(0..6) {
            0 | 1 => self.leaf(scope),
            2 | 3 => {
                let x = self.binder();
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                lam(&x, self.expr(depth - 1, &inner))
            }
            _ => pair(self.value(depth - 1, scope), self.value(depth - 1, scope)),
        }
    }

    /// An expression whose free variables are in `scope`.
    pub fn expr(&mut self, depth: usize, scope: &[Name]) -> Expr {
        if depth == 0 {
            return self.leaf(scope);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..20) {
            0 | 1 => self.value(d, scope),
            2 => self.leaf(scope),
            3 | 4 => {
                let x = self.binder();
                let bound = self.expr(d, scope);
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                let_(&x, bound, self.expr(d, &inner))
            }
            5 => {
                let n = self.rng.gen_range(1..=3);
                seq((0..n).map(|_| self.expr(d, scope)).collect())
            }
            6 => if_(self.expr(d, scope), self.expr(d, scope), self.expr(d, scope)),
            7 | 8 => mk(self.expr(d, scope)),
            9 => get(self.expr(d, scope)),
            10 => set(self.expr(d, scope), self.expr(d, scope)),
            11 => eq(self.expr(d, scope), self.expr(d, scope)),
            12 => cellp(self.expr(d, scope)),
            13 => pair(self.expr(d, scope), self.expr(d, scope)),
            14 => {
                if self.rng.gen_bool(0.5) {
                    fst(self.expr(d, scope))
                } else {
                    snd(self.expr(d, scope))
                }
            }
            15 => {
                if self.rng.gen_bool(0.5) {
                    add1(self.expr(d, scope))
                } else {
                    sub1(self.expr(d, scope))
                }
            }
            16 => natp(self.expr(d, scope)),
            17 | 18 => {
                let x = self.binder();
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                app(lam(&x, self.expr(d, &inner)), self.expr(d, scope))
            }
            _ => {
                // never a variable applied to a variable
                let f = self.leaf(scope);
                let a = self.atom();
                app(f, a)
            }
        }
    }

    /// One evaluation frame with operands over `scope`; `•` is in evaluation
    /// position.
    fn frame(&mut self, scope: &[Name]) -> Expr {
        let h = hole;
        match self.rng.gen_range(0..16) {
            0 => app(h(), self.value(1, scope)),
            1 => app(self.value(1, scope), h()),
            2 | 3 => {
                let x = self.binder();
                let mut inner = scope.to_vec();
                inner.push(x.clone());
                let_(&x, h(), self.expr(2, &inner))
            }
            4 => seq(vec![h(), self.expr(1, scope)]),
            5 => if_(h(), self.expr(1, scope), self.expr(1, scope)),
            6 => mk(h()),
            7 => get(h()),
            8 => set(h(), self.value(1, scope)),
            9 => set(self.value(0, scope), h()),
            10 => eq(h(), self.value(0, scope)),
            11 => eq(self.value(0, scope), h()),
            12 => pair(h(), self.expr(1, scope)),
            13 => pair(self.value(1, scope), h()),
            14 => {
                if self.rng.gen_bool(0.5) {
                    fst(h())
                } else {
                    snd(h())
                }
            }
            _ => {
                if self.rng.gen_bool(0.5) {
                    add1(h())
                } else {
                    cellp(h())
                }
            }
        }
    }

    /// A reduction context of 1..=depth frames.
    pub fn reduction_context(&mut self, depth: usize, scope: &[Name]) -> Context {
        let n = self.rng.gen_range(1..=depth.max(1));
        let mut term = Expr::Hole;
        for _ in 0..n {
            let f = self.frame(scope);
            term = crate::syntax::plug_term(&f, &term);
        }
        Context::new(term, ContextSort::Reduction)
    }

    /// A univalent context built from `let` and `seq` frames over `scope`,
    /// returning the context and the variables bound on the path.
    pub fn univalent_context(&mut self, depth: usize, scope: &[Name]) -> (Context, Vec<Name>) {
        let mut scope = scope.to_vec();
        let mut bound = Vec::new();
        let mut layers = Vec::new();
        for _ in 0..self.rng.gen_range(1..=depth.max(1)) {
            if self.rng.gen_bool(0.6) {
                let x = self.binder();
                let e = self.expr(2, &scope);
                layers.push((Some(x.clone()), e));
                scope.push(x.clone());
                bound.push(x);
            } else {
                let e = self.expr(2, &scope);
                layers.push((None, e));
            }
        }
        let mut term = Expr::Hole;
        for (x, e) in layers.into_iter().rev() {
            term = match x {
                Some(x) => let_(&x, e, term),
                None => seq(vec![e, term]),
            };
        }
        (Context::new(term, ContextSort::Univalent), bound)
    }

    /// A memory of up to `max_cells` cells with atom or cell contents.
    pub fn memory(&mut self, max_cells: usize) -> Memory {
        let k = self.rng.gen_range(0..=max_cells);
        let names: Vec<Name> = (0..k).map(|i| format!("z{i}")).collect();
        let mut m = Memory::new();
        for z in &names {
            let v = if self.rng.gen_bool(0.3) {
                var(self.pick(&names))
            } else {
                self.atom()
            };
            m.insert(z.clone(), v);
        }
        m
    }

    /// `Γ; e` with `e` closed over the cells of `Γ`.
    pub fn closed_description(&mut self, max_cells: usize, depth: usize) -> Description {
        let memory = self.memory(max_cells);
        let scope: Vec<Name> = memory.names().cloned().collect();
        let expr = self.expr(depth, &scope);
        Description::new(memory, expr)
    }
}
