//! Hopf-algebra layer: U_q(su(r+1)), its action on O(SU_q(r+1)), the
//! q-exterior algebra and the Dolbeault-type operators.

pub mod action;
pub mod forms;
pub mod suq;
pub mod uq;

pub use action::UqAction;
pub use forms::{eps_q, eps_q_star, Dolbeault, ExtOp, ExteriorVector, FormElement, FormOperator, Mask};
pub use suq::SuQ;
pub use uq::{Gen, Tensor, Uq};
