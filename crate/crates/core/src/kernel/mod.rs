//! Convolution kernels of the dyadic cone multipliers and the checks built
//! on them.

pub mod eval;
pub mod lemmas;
pub mod partition;
pub mod regions;
pub mod windows;

pub use eval::{kernel_k0, kernel_kkl, kernel_kl, KernelLab, KernelRequest, KernelSample, Localization};
pub use regions::{classify_region, RegionLabel};
pub use windows::{make_windows, make_windows_with, Bump, SmoothWindow, WindowKind};
