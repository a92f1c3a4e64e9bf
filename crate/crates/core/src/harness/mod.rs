//! Campaign configuration, execution, verification and export.
