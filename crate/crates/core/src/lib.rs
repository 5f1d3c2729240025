//! Desk-scale computations for multiple recurrence.
//!
//! The crate provides explicit measure-preserving systems with exact
//! fixed-point dynamics ([`systems`]), observables and sets with exact
//! measures ([`observables`], [`sets`]), multiple ergodic averages
//! ([`averages`]), uniformity norms and cube seminorms ([`seminorms`]),
//! integer-set constructions ([`combinatorics`]) and recurrence scans
//! ([`recurrence`]).

pub mod averages;
pub mod combinatorics;
pub mod error;
pub mod heisenberg;
pub mod observables;
pub mod recurrence;
pub mod reduce;
pub mod seminorms;
pub mod sets;
pub mod systems;
pub mod torus;

pub use error::{Error, Result};
pub use heisenberg::{hall_petresco, HallPetresco, HeisenbergElement};
pub use observables::{evaluate, haar_integral, Observable};
pub use sets::{set_measure, BitSet, Interval, IntervalUnion, SetSpec};
pub use systems::{canonicalize, iterate, step, weyl_sum, CommutingFamily, NilPoint, PhasePoint, SkewForm, SystemSpec};
pub use torus::{TorusCoord, WideCoord};
pub use averages::{AverageReport, Evaluation, IteratePattern, MeasureMethod};
pub use combinatorics::IntegerWindowSet;
pub use recurrence::{MulticorrelationSeries, ScanReport, SpectralMeasure};
pub use seminorms::{ComplexSignal, GowersMethod, GowersValue};
