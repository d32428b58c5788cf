pub mod checks;
pub mod error;
pub mod families;
pub mod field;
pub mod io;
pub mod profile;
pub mod rat;
pub mod residue;
pub mod series;
pub mod swan;
pub mod towers;

pub use error::{Error, Result};
pub use families::{FamilySpec, KinkVerdict, Member, MemberData, MinimizerCertificate};
pub use field::{Elem, Field, FieldConfig, FieldRef};
pub use profile::{build_profile, closed_disk_at, vanishing_cycles_report, DiskReport, PlProfile, VcReport};
pub use rat::Q;
pub use residue::{Differential, RatFunc};
pub use series::{Direction, LaurentSeries, Tail};
pub use swan::{swan_at, swan_at_auto, CoverSpec, Settings, SwanValue};
pub use towers::{tower_disk_decision, TowerDiskReport, TowerSpec};
