//! Dense networks, reverse-mode gradients and the Adam optimizer.

pub mod adam;
pub mod checkpoint;
pub mod mlp;
pub mod schedule;
pub mod tape;
pub mod tensor;

pub use adam::{adam_step, AdamState};
pub use checkpoint::Checkpoint;
pub use mlp::{hamiltonian_field_from_net, Activation, BoundMlp, Mlp, NetHamiltonianField};
pub use schedule::{LrSchedule, ScheduleKind};
pub use tape::{Act, Batch, Gradients, Tape, Var};
pub use tensor::Tensor;

/// Gradient of every parameter of `net` after a backward sweep, in
/// [`Mlp::params`] order.
pub fn flat_gradient(bound: &BoundMlp, grads: &Gradients) -> Vec<f64> {
    let mut out = Vec::new();
    for (w, b) in bound.weights.iter().zip(&bound.biases) {
        out.extend(grads.wrt(w).data);
        out.extend(grads.wrt(b).data);
    }
    out
}
