//! Tsetlin automata and a minimal two-class Tsetlin Machine.
//!
//! Each automaton is an integer state in `[1, 2N]`. States `1..=N` choose
//! Exclude, states `N+1..=2N` choose Include. A clause owns one automaton per
//! literal; literals are laid out as `[x_0, .., x_{F-1}, !x_0, .., !x_{F-1}]`.

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Action {
    Exclude,
    Include,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feedback {
    Reward,
    Penalty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TsetlinAutomaton {
    state: u32,
    n_half: u32,
}

impl TsetlinAutomaton {
    /// Starts on the Exclude state adjacent to the decision boundary.
    pub fn new(n_half: u32) -> Self {
        assert!(n_half > 0, "automaton needs at least one state per action");
        Self {
            state: n_half,
            n_half,
        }
    }

    pub fn with_state(state: u32, n_half: u32) -> Result<Self> {
        if n_half == 0 {
            return Err(Error::invalid("n_half", "must be positive"));
        }
        if !(1..=2 * n_half).contains(&state) {
            return Err(Error::invalid(
                "state",
                format!("{state} outside [1, {}]", 2 * n_half),
            ));
        }
        Ok(Self { state, n_half })
    }

    #[inline]
    pub fn state(&self) -> u32 {
        self.state
    }

    #[inline]
    pub fn n_half(&self) -> u32 {
        self.n_half
    }

    #[inline]
    pub fn action(&self) -> Action {
        if self.state > self.n_half {
            Action::Include
        } else {
            Action::Exclude
        }
    }

    /// Applies one feedback in place and returns the signed state change
    /// (`-1`, `0` or `+1`).
    pub fn apply(&mut self, feedback: Feedback) -> i32 {
        let toward_include = match (self.action(), feedback) {
            (Action::Include, Feedback::Reward) | (Action::Exclude, Feedback::Penalty) => true,
            (Action::Include, Feedback::Penalty) | (Action::Exclude, Feedback::Reward) => false,
        };
        let old = self.state;
        if toward_include {
            self.state = (self.state + 1).min(2 * self.n_half);
        } else {
            self.state = self.state.saturating_sub(1).max(1);
        }
        self.state as i32 - old as i32
    }

    /// Value-returning form of [`apply`](Self::apply).
    pub fn step(mut self, feedback: Feedback) -> Self {
        self.apply(feedback);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> i32 {
        match self {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalMode {
    Train,
    Infer,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    polarity: Polarity,
    automata: Vec<TsetlinAutomaton>,
}

impl Clause {
    pub fn new(polarity: Polarity, n_features: usize, n_half: u32) -> Self {
        Self {
            polarity,
            automata: vec![TsetlinAutomaton::new(n_half); 2 * n_features],
        }
    }

    pub fn from_automata(polarity: Polarity, automata: Vec<TsetlinAutomaton>) -> Result<Self> {
        if automata.is_empty() || automata.len() % 2 != 0 {
            return Err(Error::invalid(
                "automata",
                "a clause needs one automaton per literal (2 per feature)",
            ));
        }
        Ok(Self { polarity, automata })
    }

    pub fn polarity(&self) -> Polarity {
        self.polarity
    }

    pub fn automata(&self) -> &[TsetlinAutomaton] {
        &self.automata
    }

    pub fn included(&self) -> impl Iterator<Item = usize> + '_ {
        self.automata
            .iter()
            .enumerate()
            .filter(|(_, ta)| ta.action() == Action::Include)
            .map(|(i, _)| i)
    }

    /// Conjunction of the included literals. An empty clause outputs 1 while
    /// training and 0 at inference.
    pub fn eval(&self, literals: &[bool], mode: EvalMode) -> Result<bool> {
        if literals.len() != self.automata.len() {
            return Err(Error::LengthMismatch {
                expected: self.automata.len(),
                actual: literals.len(),
            });
        }
        let mut any_included = false;
        for (ta, &lit) in self.automata.iter().zip(literals) {
            if ta.action() == Action::Include {
                any_included = true;
                if !lit {
                    return Ok(false);
                }
            }
        }
        Ok(any_included || mode == EvalMode::Train)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TransitionEvent {
    pub ta_index: usize,
    pub old_state: u32,
    pub new_state: u32,
    pub sample_index: usize,
}

impl TransitionEvent {
    pub fn delta(&self) -> i32 {
        self.new_state as i32 - self.old_state as i32
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TmConfig {
    pub n_features: usize,
    /// Total clause count, split evenly between the two polarities.
    pub clauses: usize,
    pub threshold: u32,
    pub specificity: f64,
    pub n_half: u32,
}

impl Default for TmConfig {
    fn default() -> Self {
        Self {
            n_features: 2,
            clauses: 20,
            threshold: 6,
            specificity: 3.9,
            n_half: 150,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsetlinMachine {
    clauses: Vec<Clause>,
    threshold: u32,
    specificity: f64,
    n_half: u32,
    n_features: usize,
}

impl TsetlinMachine {
    pub fn new(config: TmConfig) -> Result<Self> {
        if config.n_features == 0 {
            return Err(Error::invalid("n_features", "must be positive"));
        }
        if config.clauses == 0 || config.clauses % 2 != 0 {
            return Err(Error::invalid(
                "clauses",
                format!("{} is not a positive even number", config.clauses),
            ));
        }
        if config.threshold == 0 {
            return Err(Error::invalid("threshold", "must be positive"));
        }
        if !(config.specificity > 1.0) {
            return Err(Error::invalid("specificity", "must be greater than 1"));
        }
        if config.n_half == 0 {
            return Err(Error::invalid("n_half", "must be positive"));
        }
        // Polarities alternate: even clauses vote for the class, odd against.
        let clauses = (0..config.clauses)
            .map(|j| {
                let polarity = if j % 2 == 0 {
                    Polarity::Positive
                } else {
                    Polarity::Negative
                };
                Clause::new(polarity, config.n_features, config.n_half)
            })
            .collect();
        Ok(Self {
            clauses,
            threshold: config.threshold,
            specificity: config.specificity,
            n_half: config.n_half,
            n_features: config.n_features,
        })
    }

    pub fn from_clauses(clauses: Vec<Clause>, threshold: u32, specificity: f64) -> Result<Self> {
        let first = clauses
            .first()
            .ok_or_else(|| Error::invalid("clauses", "at least one clause required"))?;
        let width = first.automata.len();
        let n_half = first.automata[0].n_half;
        if clauses
            .iter()
            .any(|c| c.automata.len() != width || c.automata.iter().any(|ta| ta.n_half != n_half))
        {
            return Err(Error::invalid("clauses", "clauses disagree on shape"));
        }
        let positives = clauses
            .iter()
            .filter(|c| c.polarity == Polarity::Positive)
            .count();
        if 2 * positives != clauses.len() {
            return Err(Error::invalid(
                "clauses",
                "polarity +1 and -1 clause counts must match",
            ));
        }
        if threshold == 0 || !(specificity > 1.0) {
            return Err(Error::invalid("threshold", "T > 0 and s > 1 required"));
        }
        Ok(Self {
            clauses,
            threshold,
            specificity,
            n_half,
            n_features: width / 2,
        })
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_half(&self) -> u32 {
        self.n_half
    }

    pub fn literals_per_clause(&self) -> usize {
        2 * self.n_features
    }

    pub fn num_automata(&self) -> usize {
        self.clauses.len() * self.literals_per_clause()
    }

    /// Automaton by flat index `clause * 2F + literal`.
    pub fn automaton(&self, ta_index: usize) -> &TsetlinAutomaton {
        let w = self.literals_per_clause();
        &self.clauses[ta_index / w].automata[ta_index % w]
    }

    pub fn automata(&self) -> impl Iterator<Item = &TsetlinAutomaton> {
        self.clauses.iter().flat_map(|c| c.automata.iter())
    }

    pub fn literals(&self, input: &[bool]) -> Result<Vec<bool>> {
        if input.len() != self.n_features {
            return Err(Error::LengthMismatch {
                expected: self.n_features,
                actual: input.len(),
            });
        }
        Ok(input.iter().copied().chain(input.iter().map(|x| !x)).collect())
    }

    pub fn class_sum(&self, input: &[bool], mode: EvalMode) -> Result<i32> {
        let literals = self.literals(input)?;
        self.clauses.iter().try_fold(0, |acc, c| {
            Ok(acc + c.polarity.sign() * i32::from(c.eval(&literals, mode)?))
        })
    }

    /// Ties (class sum of zero) resolve to class 1.
    pub fn infer(&self, input: &[bool]) -> Result<bool> {
        Ok(self.class_sum(input, EvalMode::Infer)? >= 0)
    }

    /// One online update. Returns an event for every automaton whose state
    /// moved, in flat-index order.
    pub fn train_step<R: Rng + ?Sized>(
        &mut self,
        input: &[bool],
        label: bool,
        sample_index: usize,
        rng: &mut R,
    ) -> Result<Vec<TransitionEvent>> {
        let literals = self.literals(input)?;
        let outputs = self
            .clauses
            .iter()
            .map(|c| c.eval(&literals, EvalMode::Train))
            .collect::<Result<Vec<_>>>()?;
        let sum: i32 = self
            .clauses
            .iter()
            .zip(&outputs)
            .map(|(c, &o)| c.polarity.sign() * i32::from(o))
            .sum();

        let t = self.threshold as i32;
        let clamped = sum.clamp(-t, t);
        let p_update = if label {
            f64::from(t - clamped) / f64::from(2 * t)
        } else {
            f64::from(t + clamped) / f64::from(2 * t)
        };

        let width = self.literals_per_clause();
        let s = self.specificity;
        let mut events = Vec::new();
        for (j, (clause, &output)) in self.clauses.iter_mut().zip(&outputs).enumerate() {
            if rng.random::<f64>() >= p_update {
                continue;
            }
            let type_one = (clause.polarity == Polarity::Positive) == label;
            for (k, (ta, &lit)) in clause.automata.iter_mut().zip(&literals).enumerate() {
                let old = ta.state;
                if type_one {
                    type_one_feedback(ta, output, lit, s, rng);
                } else {
                    type_two_feedback(ta, output, lit);
                }
                if ta.state != old {
                    events.push(TransitionEvent {
                        ta_index: j * width + k,
                        old_state: old,
                        new_state: ta.state,
                        sample_index,
                    });
                }
            }
        }
        Ok(events)
    }
}

/// Recognize feedback: reinforce true literals of firing clauses, and erode
/// everything else with probability `1/s`.
fn type_one_feedback<R: Rng + ?Sized>(
    ta: &mut TsetlinAutomaton,
    clause_output: bool,
    literal: bool,
    s: f64,
    rng: &mut R,
) {
    let draw = rng.random::<f64>();
    let action = ta.action();
    match (clause_output, literal) {
        (true, true) => {
            if draw < (s - 1.0) / s {
                let fb = match action {
                    Action::Include => Feedback::Reward,
                    Action::Exclude => Feedback::Penalty,
                };
                ta.apply(fb);
            }
        }
        (true, false) => {
            if action == Action::Exclude && draw < 1.0 / s {
                ta.apply(Feedback::Reward);
            }
        }
        (false, _) => {
            if draw < 1.0 / s {
                let fb = match action {
                    Action::Include => Feedback::Penalty,
                    Action::Exclude => Feedback::Reward,
                };
                ta.apply(fb);
            }
        }
    }
}

/// Reject feedback: push excluded false literals toward inclusion so the
/// firing clause stops firing on this input.
fn type_two_feedback(ta: &mut TsetlinAutomaton, clause_output: bool, literal: bool) {
    if clause_output && !literal && ta.action() == Action::Exclude {
        ta.apply(Feedback::Penalty);
    }
}

pub type Sample = (Vec<bool>, bool);

/// Uniform noise-free XOR samples over two input bits.
pub fn xor_dataset<R: Rng + ?Sized>(n_samples: usize, rng: &mut R) -> Result<Vec<Sample>> {
    if n_samples == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok((0..n_samples)
        .map(|_| {
            let a: bool = rng.random();
            let b: bool = rng.random();
            (vec![a, b], a ^ b)
        })
        .collect())
}

pub const XOR_TRUTH_TABLE: [([bool; 2], bool); 4] = [
    ([false, false], false),
    ([false, true], true),
    ([true, false], true),
    ([true, true], false),
];

/// Fraction of the four XOR points classified correctly.
pub fn xor_accuracy(tm: &TsetlinMachine) -> Result<f64> {
    let mut correct = 0;
    for (x, y) in XOR_TRUTH_TABLE {
        if tm.infer(&x)? == y {
            correct += 1;
        }
    }
    Ok(f64::from(correct) / 4.0)
}

/// Trains on every sample in order, returning the full transition stream.
pub fn train<R: Rng + ?Sized>(
    tm: &mut TsetlinMachine,
    dataset: &[Sample],
    rng: &mut R,
) -> Result<Vec<TransitionEvent>> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut events = Vec::new();
    for (i, (x, y)) in dataset.iter().enumerate() {
        events.extend(tm.train_step(x, *y, i, rng)?);
    }
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ta(state: u32) -> TsetlinAutomaton {
        TsetlinAutomaton::with_state(state, 150).unwrap()
    }

    #[test]
    fn step_examples() {
        assert_eq!(ta(150).step(Feedback::Reward).state(), 149);
        assert_eq!(ta(150).step(Feedback::Penalty).state(), 151);
        assert_eq!(ta(1).step(Feedback::Reward).state(), 1);
        assert_eq!(ta(300).step(Feedback::Reward).state(), 300);
        assert_eq!(ta(151).step(Feedback::Penalty).state(), 150);
        assert_eq!(ta(151).step(Feedback::Reward).state(), 152);
    }

    #[test]
    fn action_boundary() {
        assert_eq!(ta(150).action(), Action::Exclude);
        assert_eq!(ta(151).action(), Action::Include);
        assert!(TsetlinAutomaton::with_state(0, 150).is_err());
        assert!(TsetlinAutomaton::with_state(301, 150).is_err());
    }

    fn clause_with(included: &[usize]) -> Clause {
        let automata = (0..4)
            .map(|i| if included.contains(&i) { ta(151) } else { ta(150) })
            .collect();
        Clause::from_automata(Polarity::Positive, automata).unwrap()
    }

    #[test]
    fn clause_eval_examples() {
        // literal layout: [x1, x2, !x1, !x2]
        let c = clause_with(&[0, 3]);
        assert!(c.eval(&[true, false, false, true], EvalMode::Infer).unwrap());
        let c = clause_with(&[0]);
        assert!(!c.eval(&[false, true, true, false], EvalMode::Infer).unwrap());
        let empty = clause_with(&[]);
        assert!(empty.eval(&[true, true, false, false], EvalMode::Train).unwrap());
        assert!(!empty.eval(&[true, true, false, false], EvalMode::Infer).unwrap());
    }

    #[test]
    fn clause_eval_length_mismatch() {
        let c = clause_with(&[0]);
        assert!(matches!(
            c.eval(&[true, false], EvalMode::Infer),
            Err(Error::LengthMismatch { expected: 4, actual: 2 })
        ));
    }

    #[test]
    fn infer_examples() {
        let cfg = TmConfig {
            clauses: 4,
            threshold: 1,
            ..TmConfig::default()
        };
        let tm = TsetlinMachine::new(cfg).unwrap();
        assert_eq!(tm.class_sum(&[true, false], EvalMode::Infer).unwrap(), 0);
        assert!(tm.infer(&[true, false]).unwrap());

        let tm = TsetlinMachine::from_clauses(
            vec![
                clause_with(&[0, 3]),
                Clause::new(Polarity::Negative, 2, 150),
            ],
            1,
            3.9,
        )
        .unwrap();
        assert!(tm.infer(&[true, false]).unwrap());
    }

    #[test]
    fn machine_rejects_odd_clause_count() {
        let cfg = TmConfig {
            clauses: 3,
            ..TmConfig::default()
        };
        assert!(TsetlinMachine::new(cfg).is_err());
    }

    #[test]
    fn xor_dataset_labels() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let data = xor_dataset(5000, &mut rng).unwrap();
        assert_eq!(data.len(), 5000);
        assert!(data.iter().all(|(x, y)| (x[0] ^ x[1]) == *y));
        assert!(xor_dataset(0, &mut rng).is_err());
    }

    #[test]
    fn train_events_are_unit_steps_and_deterministic() {
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let data = xor_dataset(5000, &mut rng).unwrap();
            let mut tm = TsetlinMachine::new(TmConfig::default()).unwrap();
            let events = train(&mut tm, &data, &mut rng).unwrap();
            (tm, events)
        };
        let (tm, events) = run(11);
        assert!(events.iter().all(|e| e.delta().abs() == 1));
        assert_eq!(xor_accuracy(&tm).unwrap(), 1.0);
        let (_, again) = run(11);
        assert_eq!(events, again);
    }
}
