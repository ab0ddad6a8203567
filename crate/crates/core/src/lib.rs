//! Level-of-detail asset generation, fidelity metrics, memory accounting and
//! perceptual scheduling for crowds rendered with meshes, impostors,
//! radiance fields and Gaussian splats.
//!
//! | module | purpose |
//! |---|---|
//! | [`imaging`] | RGBA rasters, alpha bounding boxes, area resampling, compositing |
//! | [`metrics`] | PSNR, SSIM, sequence reports, ingested LPIPS |
//! | [`impostor`] | stabilized sprite atlases with UV lookup |
//! | [`mesh_lod`] | quadric edge-collapse decimation and OBJ I/O |
//! | [`splat_lod`] | opacity pruning, count caps, PLY I/O |
//! | [`nerf_config`] | hash-grid presets and trainer configs |
//! | [`policy`] | distance bands, representation choice, memory budgets |
//! | [`study_stats`] | proportions, Type II ANOVA, logit GLM, LR tests |
//! | [`synth`] | procedural fixtures used by tests, examples and the demo |

pub mod imaging;
pub mod impostor;
pub mod mesh_lod;
pub mod metrics;
pub mod nerf_config;
pub mod policy;
pub mod splat_lod;
pub mod study_stats;
pub mod synth;

// Compile and run every listing in the guide as a doctest.
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/impostors.md")]
mod book_impostors {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/mesh-lod.md")]
mod book_mesh_lod {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/splats.md")]
mod book_splats {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/nerf-presets.md")]
mod book_nerf_presets {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/metrics.md")]
mod book_metrics {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/scheduling.md")]
mod book_scheduling {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/study-analysis.md")]
mod book_study_analysis {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/pipeline.md")]
mod book_pipeline {}
#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
mod readme {}
