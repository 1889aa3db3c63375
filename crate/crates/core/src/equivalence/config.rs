use crate::syntax::build::*;
use crate::syntax::Expr;

/// Bounds for every enumeration the oracles perform.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumConfig {
    pub value_depth: usize,
    pub max_cells: usize,
    pub ctx_depth: usize,
    pub max_steps: usize,
    pub atoms: Vec<Expr>,
    pub probe_pool: Vec<Expr>,
    pub seed: u64,
    /// Cases per oracle call; larger spaces are sampled.
    pub max_cases: usize,
    /// Cases per law instance.
    pub instance_cases: usize,
    /// Largest natural tried for `Nat` arguments.
    pub nat_bound: u64,
    /// Restrict generated values to atoms and cells.
    pub first_order: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig {
            value_depth: 2,
            max_cells: 3,
            ctx_depth: 2,
            max_steps: 2000,
            atoms: vec![nil(), t(), nat(0), nat(1), nat(2)],
            probe_pool: vec![lam("x", var("x")), lam("x", nil()), lam("x", app(var("x"), var("x")))],
            seed: 0,
            max_cases: 10_000,
            instance_cases: 48,
            nat_bound: 10,
            first_order: false,
        }
    }
}

impl EnumConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn first_order(mut self) -> Self {
        self.first_order = true;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let counts = [
            ("value_depth", self.value_depth),
            ("max_cells", self.max_cells),
            ("ctx_depth", self.ctx_depth),
            ("max_steps", self.max_steps),
            ("max_cases", self.max_cases),
            ("instance_cases", self.instance_cases),
        ];
        for (name, n) in counts {
            if n == 0 {
                return Err(format!("{name} must be at least 1"));
            }
        }
        if let Some(a) = self.atoms.iter().find(|a| !a.is_atom()) {
            return Err(format!("not an atom: {a}"));
        }
        if let Some(p) = self.probe_pool.iter().find(|p| !matches!(p, Expr::Lambda(..)) || !p.free_vars().is_empty()) {
            return Err(format!("probe must be a closed lambda: {p}"));
        }
        Ok(())
    }

    /// One-line echo for reports.
    pub fn describe(&self) -> String {
        format!(
            "value-depth {} cells {} ctx-depth {} max-steps {} max-cases {} seed {}{}",
            self.value_depth,
            self.max_cells,
            self.ctx_depth,
            self.max_steps,
            self.max_cases,
            self.seed,
            if self.first_order { " first-order" } else { "" }
        )
    }
}
