//! Sample-optimal PAC learning in the realizable setting.
//!
//! The centerpiece is a learner that trains a black-box ERM oracle only on
//! small subsamples of the input sequence and still achieves optimal sample
//! complexity. It combines three ingredients:
//!
//! * a recursive subsampling scheme that maps a training sequence of length
//!   `m` onto `5^k` overlapping rows of length roughly `m/5` each
//!   ([`subsample`]),
//! * a subsampled boosting loop that trains the oracle on `s`-sized draws
//!   from the current weighting and certifies a margin on the whole row
//!   ([`boost`]),
//! * a voter-sampling wrapper that picks random rows and random voters from
//!   each row's boosted committee, then predicts by an unweighted majority
//!   ([`learner`]).
//!
//! Supporting modules supply labeled-sequence views ([`data`]), majority
//! votes and ensembles ([`vote`]), reference ERM oracles ([`erm`]), exact
//! error and generalization-bound evaluators ([`analysis`]), operation-cost
//! accounting ([`ledger`]), and runnable property suites ([`verify`]).
//!
//! All randomness is driven by seeded ChaCha streams ([`rng`]); identical
//! seeds give identical results, bit for bit.

pub mod analysis;
pub mod boost;
pub mod data;
pub mod erm;
pub mod learner;
pub mod ledger;
pub mod rng;
pub mod subsample;
pub mod verify;
pub mod vote;
