//! Enumeration oracle over `Q_p`.

pub mod modarith;
pub mod phi;
pub mod refine;
pub mod cells;
pub mod characters;
pub mod complex;
pub mod oracle;
pub mod expsum;
pub mod oscillatory;
