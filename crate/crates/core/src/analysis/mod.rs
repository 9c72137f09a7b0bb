//! Adoption tables over time, the year-shuffled null model, confound
//! binning, room-type and labeled-set validation, host segments and
//! neighbourhood penetration.

mod geometry;
mod neighbourhood;
mod roomtype;
mod segments;
mod table;
mod temporal;
mod validation;

pub use geometry::{
    assign_districts, load_geojson, parse_geojson, point_in_district, read_district_csv, District, Polygon, Ring,
};
pub use neighbourhood::{neighbourhood_analysis, CityCorrelation, DistrictRow, NeighbourhoodReport};
pub use roomtype::{room_type_validation, RoomTypeChange, RoomTypeValidation};
pub use segments::{host_segments, segment_for_rank, segment_social_scores, HostSegmentation, SegmentScore};
pub use table::{adoption_table, temporal_adoption, trend_slopes, AdoptionRow, AdoptionTable, TrendSlope};
pub use temporal::{
    apply_year_permutation, confound_analysis, null_model, shuffle_years, ConfoundReport, NullModelReport,
    PeriodComparison, YearRange, DEFAULT_EARLY, DEFAULT_LATE,
};
pub use validation::{labeled_set_adoption, labeled_sets, top_n_dictionary, LabeledSetAdoption};
