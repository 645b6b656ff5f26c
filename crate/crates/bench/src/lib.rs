//! Benchmark instances shared by the criterion targets.

use rinv_core::decomposition::{random_operator, random_tight_frame};
use rinv_core::{Decomposition, DenseMatrix, FrameMode};

/// `L = I_n` with the standard basis.
pub fn identity_instance(n: usize) -> Decomposition {
    Decomposition::from_standard_basis(DenseMatrix::identity(n)).expect("square identity")
}

/// Random operator of unit spectral norm over a random Parseval frame of `2n` vectors.
pub fn frame_instance(n: usize, seed: u64) -> Decomposition {
    let frame = random_tight_frame(n, 2 * n, seed).expect("m >= n");
    Decomposition::new(random_operator(n, seed), frame, FrameMode::Frame)
        .expect("matching dimensions")
}
