use rand::RngCore;

use crate::error::{invalid, Result};
use crate::learner::{Action, Feedback, Learner};

/// Builds a fresh learner tuned for the given window length.
pub type LearnerFactory = Box<dyn FnMut(usize) -> Result<Box<dyn Learner>> + Send>;

/// Rounds at which the doubling trick starts a fresh learner after round 1:
/// windows `W, 2W, 4W, …` begin at `W+1, 3W+1, 7W+1, …`.
pub fn doubling_reset_rounds(base_window: usize, horizon: usize) -> Vec<usize> {
    let mut out = Vec::new();
    if base_window == 0 {
        return out;
    }
    let mut end = base_window;
    let mut window = base_window;
    while end < horizon {
        out.push(end + 1);
        window *= 2;
        end += window;
    }
    out
}

/// Restarts a horizon-tuned learner on windows of doubling length.
pub struct Doubling {
    factory: LearnerFactory,
    inner: Box<dyn Learner>,
    window: usize,
    window_end: usize,
    round: usize,
    resets: Vec<usize>,
}

impl Doubling {
    pub fn new(mut factory: LearnerFactory, base_window: usize) -> Result<Self> {
        if base_window == 0 {
            return Err(invalid("base_window", "must be at least 1"));
        }
        let inner = factory(base_window)?;
        Ok(Self {
            factory,
            inner,
            window: base_window,
            window_end: base_window,
            round: 0,
            resets: Vec::new(),
        })
    }

    /// Rounds at which a fresh learner took over.
    pub fn resets(&self) -> &[usize] {
        &self.resets
    }
}

impl Learner for Doubling {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action> {
        self.round += 1;
        if self.round > self.window_end {
            self.window *= 2;
            self.window_end += self.window;
            self.inner = (self.factory)(self.window)?;
            self.resets.push(self.round);
        }
        self.inner.act(rng)
    }

    fn observe(&mut self, feedback: &Feedback, rng: &mut dyn RngCore) -> Result<()> {
        self.inner.observe(feedback, rng)
    }
}

/// Restarts a learner every `W` rounds.
pub struct Restart {
    factory: LearnerFactory,
    inner: Box<dyn Learner>,
    window: usize,
    round: usize,
}

impl Restart {
    pub fn new(mut factory: LearnerFactory, window: usize) -> Result<Self> {
        if window == 0 {
            return Err(invalid("window", "must be at least 1"));
        }
        let inner = factory(window)?;
        Ok(Self {
            factory,
            inner,
            window,
            round: 0,
        })
    }
}

impl Learner for Restart {
    fn act(&mut self, rng: &mut dyn RngCore) -> Result<Action> {
        self.round += 1;
        if self.round > 1 && (self.round - 1).is_multiple_of(self.window) {
            self.inner = (self.factory)(self.window)?;
        }
        self.inner.act(rng)
    }

    fn observe(&mut self, feedback: &Feedback, rng: &mut dyn RngCore) -> Result<()> {
        self.inner.observe(feedback, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bandit::Hedge;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::{Arc, Mutex};

    fn hedge_factory(log: Arc<Mutex<Vec<usize>>>) -> LearnerFactory {
        Box::new(move |w| {
            log.lock().unwrap().push(w);
            Ok(Box::new(Hedge::new(3, (2.0 * 3f64.ln() / w as f64).sqrt())?) as Box<dyn Learner>)
        })
    }

    fn drive(l: &mut dyn Learner, rounds: usize) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut out = Vec::new();
        for t in 1..=rounds {
            let Action::Mixed { strategy, .. } = l.act(&mut rng).unwrap() else {
                unreachable!()
            };
            out.push(strategy);
            let u = [((t * 3) as f64).sin(), ((t * 5) as f64).cos(), 0.2];
            let fb = Feedback {
                round: t,
                loss: 0.0,
                payoffs: Some(u.to_vec()),
                gradient: None,
            };
            l.observe(&fb, &mut rng).unwrap();
        }
        out
    }

    #[test]
    fn reset_schedule() {
        assert_eq!(doubling_reset_rounds(4, 20), vec![5, 13]);
        for (w, t) in [(1usize, 1000usize), (3, 50), (7, 7), (10, 10_000)] {
            let n = doubling_reset_rounds(w, t).len() as f64;
            assert!(n <= (t as f64 / w as f64).log2().ceil());
        }
        let log = Arc::new(Mutex::new(Vec::new()));
        let mut d = Doubling::new(hedge_factory(log.clone()), 4).unwrap();
        drive(&mut d, 20);
        assert_eq!(d.resets(), &[5, 13]);
        assert_eq!(*log.lock().unwrap(), vec![4, 8, 16]);
    }

    #[test]
    fn restart_edge_cases() {
        let log = Arc::new(Mutex::new(Vec::new()));
        let mut bare = Hedge::new(3, (2.0 * 3f64.ln() / 50.0).sqrt()).unwrap();
        let mut long = Restart::new(hedge_factory(log.clone()), 50).unwrap();
        assert_eq!(drive(&mut bare, 50), drive(&mut long, 50));
        let mut every = Restart::new(hedge_factory(log), 1).unwrap();
        for s in drive(&mut every, 30) {
            assert_eq!(s, vec![1.0 / 3.0; 3]);
        }
    }
}
