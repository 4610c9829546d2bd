pub mod camtensor;
pub mod losses_check;
pub mod repr_eval;
pub mod warp_demo;
pub mod weights_sim;
