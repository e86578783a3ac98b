//! Self-consistent equation-of-motion excited-state methods on a statevector
//! simulator: integral I/O, Jordan–Wigner algebra, ADAPT-VQE ground states,
//! q-sc-EOM / qEOM / QSE engines and exact sector diagonalization.

pub mod chem_io;
pub mod eom;
pub mod ground_state;
pub mod linalg;
pub mod manifolds;
pub mod operator_algebra;
pub mod oracles;
pub mod statevector;
