//! Numerical engine shared by the builder and the verifier: Chebyshev
//! series with complex evaluation, harmonic continuation from Cauchy data,
//! transport along characteristics, an embedded Runge-Kutta integrator and
//! exact piecewise quadrature in the vertical variable.

pub mod cheb;
pub mod harmonic;
pub mod ode;
pub mod quadrature;
pub mod transport;

pub use cheb::Cheb;
pub use harmonic::{harmonic_from_cauchy, Holomorphic, HarmonicFunction, Jet, Provenance};
pub use ode::{Dopri, OdeOptions};
pub use quadrature::{Segment, ZProfile};
pub use transport::{flow_pq, solve_transport, FlowPQ, TransportSolution};

pub use num_complex::Complex64 as C64;
