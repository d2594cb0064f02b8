//! Explicit constructions: interleaved spectra, the two-sided dyadic example,
//! porous closed sets, the interval-selection lemmas, the staged insertion of
//! jumps and the Cantor family without mixed spectrum.

mod cantor;
mod porosity;
mod selection;
mod staged;
mod well_mixed;

pub use cantor::{
    cantor_build, cantor_sample_points, cantor_shift, claim_6_1_check, classify_lambda_sweep, CantorNode, CantorSpec,
    CantorTree, ClaimKind, ClaimReport, ClaimSample, DensityCheck, LambdaRegime, LocatedAtom, RatioSequence,
    SpecCertificate, SpectralClass, SpectralReport, SweepConfig,
};
pub use porosity::{
    default_budgets, middle_thirds, porous_embed, theorem_5_5_check, theorem_5_5_check_set, PorosityReport,
    PorosityVerdict, PorousEmbedding, PorousFamily,
};
pub use selection::{
    lemma_4_2_select, lemma_4_3_refine, quadratic_z_points, Family, Generation, Refinement, SamplePartials,
    SelectionCertificate,
};
pub use staged::{atoms_well_mixed, pair_residual, theorem_4_1_stage, AtomDrift, StageReport};
pub use well_mixed::{build_interleaved_shift, example_5_2, is_well_mixed, Example52, WellMixedPair, WellMixedReport};
