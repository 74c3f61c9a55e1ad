//! Black-box equivalence checking of quantum circuits through Bell-inequality
//! violation.
//!
//! Two parties share `|Φ_d> = d^{-1/2} sum_i |ii>`, push their halves through
//! circuits `U1` and `U2`, and measure in fixed Fourier-shifted bases. The Bell
//! value of `(U1 ⊗ U2)|Φ_d>` reaches its quantum maximum `m(d-1)` exactly when
//! `U1 = ±U2`, bounds the distance `D(U1, U2)` from both sides, and pins it down
//! exactly once both circuits are wrapped by [`circuit::embed_double`].
//!
//! ```
//! use bellcheck::{bell, circuit, distance};
//!
//! let a = circuit::circuit_unitary(&circuit::parse_circuit("qubits 1\nH 0").unwrap());
//! let b = circuit::circuit_unitary(&circuit::parse_circuit("qubits 1\nZ 0").unwrap());
//! let psi = bell::pair_state(&circuit::embed_double(&a).unwrap(), &circuit::embed_double(&b).unwrap()).unwrap();
//! let v = bell::bell_value_gamma(&psi, 4, 2).unwrap();
//! let d = distance::distance_from_embedded_value(v, 4, 2).unwrap();
//! assert!((d - distance::circuit_distance(&a, &b).unwrap()).abs() < 1e-9);
//! ```

pub mod bell;
pub mod circuit;
pub mod distance;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod measurement;
pub mod rng;
pub mod sampler;
pub mod svg;

pub use error::{Error, Result};
pub use linalg::{StateVector, UnitaryMatrix};
pub use rng::RngStream;
