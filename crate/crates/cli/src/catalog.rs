//! The static catalog printed by `list-algos`.

pub struct Entry {
    pub name: &'static str,
    pub anchor: &'static str,
    pub parameters: &'static str,
}

pub const LEARNERS: &[Entry] = &[
    Entry {
        name: "ucb",
        anchor: "Alg. 1",
        parameters: "alpha > 2 (default 3)",
    },
    Entry {
        name: "hedge",
        anchor: "Alg. 2",
        parameters: "step_size | auto",
    },
    Entry {
        name: "exp3",
        anchor: "Alg. 3",
        parameters: "step_size | auto",
    },
    Entry {
        name: "ogd",
        anchor: "Alg. 4",
        parameters: "step_size | auto",
    },
    Entry {
        name: "ogd_strong",
        anchor: "Alg. 4",
        parameters: "beta, step 1/(beta t) | step_size",
    },
    Entry {
        name: "omd",
        anchor: "Alg. 5",
        parameters: "regularizer, mode, step_size | auto",
    },
    Entry {
        name: "mxl",
        anchor: "Alg. 6",
        parameters: "regularizer, step_size | auto",
    },
    Entry {
        name: "ogd0",
        anchor: "Alg. 7",
        parameters: "step_size | auto, delta | auto",
    },
];

pub const WRAPPERS: &[Entry] = &[
    Entry {
        name: "noise",
        anchor: "noisy gradient feedback",
        parameters: "kind = gaussian (sigma) | uniform (half_width)",
    },
    Entry {
        name: "doubling",
        anchor: "doubling trick",
        parameters: "base_window",
    },
    Entry {
        name: "restart",
        anchor: "fixed-window restarts",
        parameters: "window",
    },
];

pub const ENVIRONMENTS: &[Entry] = &[
    Entry {
        name: "bernoulli_bandit",
        anchor: "stochastic bandit",
        parameters: "means",
    },
    Entry {
        name: "bernoulli_losses",
        anchor: "stochastic bandit",
        parameters: "means",
    },
    Entry {
        name: "cover_adversary",
        anchor: "adversarial bandit",
        parameters: "arms, lag",
    },
    Entry {
        name: "channel_selection",
        anchor: "channel selection",
        parameters: "occupancy, redraw_every",
    },
    Entry {
        name: "adversarial_payoffs",
        anchor: "adversarial bandit",
        parameters: "arms, pattern",
    },
    Entry {
        name: "linear_stream",
        anchor: "online linear optimization",
        parameters: "set, lipschitz, bias",
    },
    Entry {
        name: "quadratic_stream",
        anchor: "strongly convex losses",
        parameters: "lower, upper, beta, spread, switch_every",
    },
    Entry {
        name: "log_det_stream",
        anchor: "MIMO covariance",
        parameters: "rows, side, trace_bound, correlation, scale",
    },
    Entry {
        name: "metric_hinge",
        anchor: "metric learning",
        parameters: "dim, trace_bound, separation, noise",
    },
];

pub fn render() -> String {
    let mut out = String::new();
    for (title, entries) in [
        ("learners", LEARNERS),
        ("wrappers", WRAPPERS),
        ("environments", ENVIRONMENTS),
    ] {
        out.push_str(title);
        out.push_str(":\n");
        for e in entries {
            let label = format!("{} ({})", e.name, e.anchor);
            out.push_str(&format!("  {label:<44} {}\n", e.parameters));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_contents() {
        let text = render();
        for name in [
            "ucb (Alg. 1)",
            "hedge (Alg. 2)",
            "exp3 (Alg. 3)",
            "ogd (Alg. 4)",
            "omd (Alg. 5)",
            "mxl (Alg. 6)",
            "ogd0 (Alg. 7)",
        ] {
            assert!(text.contains(name), "{name}");
        }
        assert!(!text.contains("klucb"));
    }
}
