//! Exact symbolic computation for small dg-enhancements of categories of
//! perfect complexes over finite ringed spaces.
//!
//! Everything is desk-scale and exact: prime-field linear algebra at the
//! bottom, then finite commutative algebras, finite ringed spaces and
//! sheaves in stalk-functor form, the rectified pullback with on-the-nose
//! functoriality, complexes with hom-complex differentials, covering and
//! resolution constructions, and a Drinfeld-quotient word algebra with
//! decidable normal forms.

pub mod error;
pub mod fp;
pub mod algebra;
pub mod ringedspace;
pub mod sheaf;
pub mod rectify;
pub mod dgcat;
pub mod resolve;
pub mod drinfeld;
pub mod fixtures;
pub mod sample;

pub use error::{Caps, Error, Result, ValidationReport};

#[cfg(test)]
mod concurrency_contract {
    // every exported value type is shareable across threads; operations
    // are pure, so concurrent evaluation is safe by construction
    fn assert_send_sync<T: Send + Sync>() {}

    #[test]
    fn core_types_are_send_and_sync() {
        assert_send_sync::<crate::algebra::FinAlgebra>();
        assert_send_sync::<crate::algebra::FinModule>();
        assert_send_sync::<crate::algebra::ModuleMap>();
        assert_send_sync::<crate::algebra::AlgebraMap>();
        assert_send_sync::<crate::ringedspace::FinRingedSpace>();
        assert_send_sync::<crate::ringedspace::RingedMap>();
        assert_send_sync::<crate::ringedspace::Open>();
        assert_send_sync::<crate::sheaf::Sheaf>();
        assert_send_sync::<crate::sheaf::SheafMap>();
        assert_send_sync::<crate::sheaf::SectionSpace>();
        assert_send_sync::<crate::rectify::DObject>();
        assert_send_sync::<crate::rectify::DMorphism>();
        assert_send_sync::<crate::dgcat::DComplex>();
        assert_send_sync::<crate::dgcat::HomElement>();
        assert_send_sync::<crate::dgcat::SheafComplex>();
        assert_send_sync::<crate::drinfeld::Quotient>();
        assert_send_sync::<crate::drinfeld::QuotientMorphism>();
    }
}
