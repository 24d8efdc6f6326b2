//! Kinematics and feasibility of the three-panel morphing chain.
//!
//! The chain is a sequence of rigid panels hinged end to end, mounted on a
//! base plate at roof level. Each panel rotates relative to its predecessor;
//! positive angles tilt a panel upward. A shape is described either by its
//! three rotation angles in degrees or, for grid shapes, by integer indices
//! into the discretized design space (65 points per axis).
//!
//! Coordinates: the chain profile lives in the (x, z) plane with the mount
//! hinge at the origin, x pointing along the chain and z upward. The bed
//! floor sits `mount_height_above_bed` below the mount plane.

use serde::{Deserialize, Serialize};

/// Admissible rotation range per axis, degrees: (min, max).
pub const AXIS_RANGES_DEG: [(f64, f64); 3] = [(-20.0, 13.0), (-30.0, 15.0), (-30.0, 15.0)];

/// Grid points per axis (64 increments between the range endpoints).
pub const GRID_POINTS_PER_AXIS: u8 = 65;

/// Largest valid grid index on any axis.
pub const MAX_GRID_INDEX: u8 = GRID_POINTS_PER_AXIS - 1;

/// Angular step per axis in degrees. The values are dyadic rationals
/// (33/64 and 45/64), so grid angles are exact in binary floating point.
pub fn axis_resolution_deg(axis: usize) -> f64 {
    let (min, max) = AXIS_RANGES_DEG[axis];
    (max - min) / f64::from(MAX_GRID_INDEX)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("grid index {index} out of range [0, {max}] on axis {axis}", max = MAX_GRID_INDEX)]
    IndexOutOfRange { axis: usize, index: u8 },
    #[error("invalid panel chain spec: {0}")]
    InvalidSpec(String),
    #[error("invalid vehicle geometry: {0}")]
    InvalidVehicle(String),
}

/// A morphing shape: three panel rotation angles, plus grid indices when the
/// shape lies on the design grid. Off-grid shapes (the neutral configuration,
/// interpolated transition states) carry `indices: None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorphShape {
    /// Rotation angles (θ1, θ2, θ3) in degrees, each relative to the
    /// previous panel.
    pub theta_deg: [f64; 3],
    /// Grid indices, present iff the shape is a design-grid point.
    pub indices: Option<[u8; 3]>,
}

impl MorphShape {
    /// Decodes grid indices into a shape: θ = range-min + index × resolution.
    pub fn from_indices(indices: [u8; 3]) -> Result<Self, GeometryError> {
        let mut theta = [0.0; 3];
        for (axis, &index) in indices.iter().enumerate() {
            if index > MAX_GRID_INDEX {
                return Err(GeometryError::IndexOutOfRange { axis, index });
            }
            theta[axis] = AXIS_RANGES_DEG[axis].0 + f64::from(index) * axis_resolution_deg(axis);
        }
        Ok(Self { theta_deg: theta, indices: Some(indices) })
    }

    /// A shape from raw angles, not snapped to the grid. No range check is
    /// performed; feasibility is the job of [`is_admissible`].
    pub fn from_angles(theta_deg: [f64; 3]) -> Self {
        Self { theta_deg, indices: None }
    }

    /// All panels horizontal. Note that zero degrees is not a grid point on
    /// any axis, so the neutral shape carries no indices.
    pub fn neutral() -> Self {
        Self::from_angles([0.0; 3])
    }

    /// The grid shape closest to the given angles (per-axis rounding,
    /// clamped into range).
    pub fn nearest_grid(theta_deg: [f64; 3]) -> Self {
        let mut indices = [0u8; 3];
        for axis in 0..3 {
            let (min, _) = AXIS_RANGES_DEG[axis];
            let raw = (theta_deg[axis] - min) / axis_resolution_deg(axis);
            indices[axis] = raw.round().clamp(0.0, f64::from(MAX_GRID_INDEX)) as u8;
        }
        Self::from_indices(indices).expect("clamped indices are in range")
    }

    /// Recovers grid indices from angles, if the angles sit exactly on the
    /// grid (within floating rounding).
    pub fn grid_indices_of(theta_deg: [f64; 3]) -> Option<[u8; 3]> {
        let mut indices = [0u8; 3];
        for axis in 0..3 {
            let (min, _) = AXIS_RANGES_DEG[axis];
            let raw = (theta_deg[axis] - min) / axis_resolution_deg(axis);
            let rounded = raw.round();
            if (raw - rounded).abs() > 1e-9 || !(0.0..=f64::from(MAX_GRID_INDEX)).contains(&rounded)
            {
                return None;
            }
            indices[axis] = rounded as u8;
        }
        Some(indices)
    }

    /// True when every angle lies inside its per-axis admissible range.
    pub fn angles_in_range(&self) -> bool {
        self.theta_deg.iter().enumerate().all(|(axis, &t)| {
            let (min, max) = AXIS_RANGES_DEG[axis];
            t >= min - 1e-9 && t <= max + 1e-9
        })
    }

    /// Per-axis linear interpolation between two shapes, `fraction` in [0, 1].
    /// The result is generally off-grid.
    pub fn lerp(&self, other: &MorphShape, fraction: f64) -> MorphShape {
        let mut theta = self.theta_deg;
        for (t, target) in theta.iter_mut().zip(other.theta_deg) {
            *t += fraction * (target - *t);
        }
        MorphShape::from_angles(theta)
    }
}

/// Dimensions and clearance limits of the hinged-panel chain.
/// All lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PanelChainSpec {
    pub panel_length_m: f64,
    pub panel_width_m: f64,
    pub panel_count: usize,
    /// Height of the mount hinge above the truck-bed floor. The bed-clearance
    /// constraint forbids chain points below `min_bed_clearance_m` above the
    /// bed, i.e. z < -(mount_height - clearance).
    pub mount_height_above_bed_m: f64,
    /// How far the chain may rise above the mount (roof) plane.
    pub max_rise_above_roof_m: f64,
    pub min_bed_clearance_m: f64,
}

impl Default for PanelChainSpec {
    fn default() -> Self {
        Self {
            panel_length_m: 0.070,
            panel_width_m: 0.241,
            panel_count: 3,
            mount_height_above_bed_m: 0.105,
            max_rise_above_roof_m: 0.020,
            min_bed_clearance_m: 0.005,
        }
    }
}

impl PanelChainSpec {
    /// A spec whose z-limits can never bind, so every in-range grid shape is
    /// admissible. Useful as the enumeration baseline: the full grid has
    /// 65^3 = 274,625 members.
    pub fn unconstrained() -> Self {
        Self {
            mount_height_above_bed_m: 10.0,
            max_rise_above_roof_m: 10.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = [
            ("panel_length_m", self.panel_length_m),
            ("panel_width_m", self.panel_width_m),
            ("mount_height_above_bed_m", self.mount_height_above_bed_m),
            ("max_rise_above_roof_m", self.max_rise_above_roof_m),
            ("min_bed_clearance_m", self.min_bed_clearance_m),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(GeometryError::InvalidSpec(format!("{name} must be > 0, got {value}")));
            }
        }
        if self.panel_count != 3 {
            return Err(GeometryError::InvalidSpec(format!(
                "panel_count must be 3 for the three-angle chain, got {}",
                self.panel_count
            )));
        }
        Ok(())
    }

    /// Lowest permitted z of any chain point, relative to the mount plane.
    pub fn floor_z_m(&self) -> f64 {
        -self.mount_height_above_bed_m + self.min_bed_clearance_m
    }
}

/// Overall dimensions of the scale vehicle model. Lengths in metres,
/// frontal area in m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VehicleGeometry {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub frontal_area_m2: f64,
    pub blockage_ratio: f64,
}

impl Default for VehicleGeometry {
    fn default() -> Self {
        Self {
            length_m: 0.7811,
            width_m: 0.2540,
            height_m: 0.2095,
            frontal_area_m2: 5.321e-2,
            blockage_ratio: 0.034,
        }
    }
}

impl VehicleGeometry {
    pub fn validate(&self) -> Result<(), GeometryError> {
        let positive = [
            ("length_m", self.length_m),
            ("width_m", self.width_m),
            ("height_m", self.height_m),
            ("frontal_area_m2", self.frontal_area_m2),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(GeometryError::InvalidVehicle(format!(
                    "{name} must be > 0, got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Blockage ratio implied by a given test-section cross area (m²).
    pub fn blockage_ratio_for(&self, test_section_area_m2: f64) -> f64 {
        self.frontal_area_m2 / test_section_area_m2
    }
}

/// Joint coordinates (x, z) in metres of the hinged chain, starting at the
/// mount origin. Panel i spans points i and i+1 and its absolute slope is
/// the cumulative sum of the relative rotations θ1..θi.
pub fn chain_profile(shape: &MorphShape, spec: &PanelChainSpec) -> Vec<[f64; 2]> {
    let mut points = Vec::with_capacity(4);
    points.push([0.0, 0.0]);
    let mut cumulative_deg = 0.0;
    let (mut x, mut z) = (0.0, 0.0);
    for &theta in &shape.theta_deg {
        cumulative_deg += theta;
        let slope = cumulative_deg.to_radians();
        x += spec.panel_length_m * slope.cos();
        z += spec.panel_length_m * slope.sin();
        points.push([x, z]);
    }
    points
}

/// Feasibility check: angles within their per-axis ranges, and every chain
/// point between the bed-clearance floor and the roof-rise ceiling.
/// Out-of-range angles yield `false` rather than an error; offspring
/// rejection in the evolution loop relies on that.
pub fn is_admissible(shape: &MorphShape, spec: &PanelChainSpec) -> bool {
    if !shape.angles_in_range() {
        return false;
    }
    let floor = spec.floor_z_m();
    let ceiling = spec.max_rise_above_roof_m;
    // Segments are straight, so extrema in z occur at the joints.
    chain_profile(shape, spec).iter().all(|p| p[1] >= floor - 1e-12 && p[1] <= ceiling + 1e-12)
}

/// All admissible grid shapes in lexicographic index order.
pub fn enumerate_grid(spec: &PanelChainSpec) -> impl Iterator<Item = MorphShape> + '_ {
    let mut next = Some([0u8; 3]);
    std::iter::from_fn(move || {
        while let Some(indices) = next {
            next = increment(indices);
            let shape = MorphShape::from_indices(indices).expect("enumeration stays in range");
            if is_admissible(&shape, spec) {
                return Some(shape);
            }
        }
        None
    })
}

fn increment(mut indices: [u8; 3]) -> Option<[u8; 3]> {
    for axis in (0..3).rev() {
        if indices[axis] < MAX_GRID_INDEX {
            indices[axis] += 1;
            return Some(indices);
        }
        indices[axis] = 0;
    }
    None
}

/// The feasible domain Θ: the admissible subset of the design grid under a
/// given chain spec. Samples uniformly by rejection.
#[derive(Debug, Clone)]
pub struct Domain {
    spec: PanelChainSpec,
}

impl Domain {
    pub fn new(spec: PanelChainSpec) -> Result<Self, GeometryError> {
        spec.validate()?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &PanelChainSpec {
        &self.spec
    }

    pub fn contains(&self, shape: &MorphShape) -> bool {
        is_admissible(shape, &self.spec)
    }

    /// Uniform draw over Θ by rejection sampling of grid indices.
    /// Returns `None` if no admissible shape is found within the attempt cap
    /// (the domain is then empty or vanishingly small).
    pub fn sample_uniform<R: rand::Rng>(&self, rng: &mut R) -> Option<MorphShape> {
        const MAX_ATTEMPTS: usize = 1_000_000;
        for _ in 0..MAX_ATTEMPTS {
            let indices = [
                rng.random_range(0..=MAX_GRID_INDEX),
                rng.random_range(0..=MAX_GRID_INDEX),
                rng.random_range(0..=MAX_GRID_INDEX),
            ];
            let shape = MorphShape::from_indices(indices).expect("sampled in range");
            if self.contains(&shape) {
                return Some(shape);
            }
        }
        None
    }

    pub fn iter(&self) -> impl Iterator<Item = MorphShape> + '_ {
        enumerate_grid(&self.spec)
    }

    pub fn admissible_count(&self) -> usize {
        self.iter().count()
    }
}

/// Writes the full design grid as CSV with an admissibility column:
/// `i1,i2,i3,theta1_deg,theta2_deg,theta3_deg,admissible`.
pub fn write_grid_csv<W: std::io::Write>(
    spec: &PanelChainSpec,
    writer: W,
) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["i1", "i2", "i3", "theta1_deg", "theta2_deg", "theta3_deg", "admissible"])?;
    let mut next = Some([0u8; 3]);
    while let Some(indices) = next {
        next = increment(indices);
        let shape = MorphShape::from_indices(indices).expect("in range");
        let t = shape.theta_deg;
        out.write_record([
            indices[0].to_string(),
            indices[1].to_string(),
            indices[2].to_string(),
            format!("{:.6}", t[0]),
            format!("{:.6}", t[1]),
            format!("{:.6}", t[2]),
            u8::from(is_admissible(&shape, spec)).to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decode_lower_bounds() {
        let s = MorphShape::from_indices([0, 0, 0]).unwrap();
        assert_eq!(s.theta_deg, [-20.0, -30.0, -30.0]);
    }

    #[test]
    fn decode_upper_bounds() {
        let s = MorphShape::from_indices([64, 64, 64]).unwrap();
        assert_eq!(s.theta_deg, [13.0, 15.0, 15.0]);
    }

    #[test]
    fn decode_midpoint() {
        // Midpoint of each range, computed by hand: ((min+max)/2).
        let s = MorphShape::from_indices([32, 32, 32]).unwrap();
        assert_eq!(s.theta_deg, [-3.5, -7.5, -7.5]);
    }

    #[test]
    fn decode_rejects_out_of_range_index() {
        let err = MorphShape::from_indices([3, 65, 0]).unwrap_err();
        assert_eq!(err, GeometryError::IndexOutOfRange { axis: 1, index: 65 });
    }

    #[test]
    fn resolutions_match_published_precision() {
        assert!((axis_resolution_deg(0) - 0.5156).abs() < 5e-5);
        assert!((axis_resolution_deg(1) - 0.7031).abs() < 5e-5);
        assert!((axis_resolution_deg(2) - 0.7031).abs() < 5e-5);
    }

    #[test]
    fn neutral_profile_is_flat() {
        let spec = PanelChainSpec::default();
        let pts = chain_profile(&MorphShape::neutral(), &spec);
        assert_eq!(pts.len(), 4);
        for p in &pts {
            assert!(p[1].abs() < 1e-15);
        }
        assert!((pts[3][0] - 0.210).abs() < 1e-12);
    }

    #[test]
    fn vertical_down_chain() {
        // Kinematics only; -90° is far outside the admissible range.
        let spec = PanelChainSpec::default();
        let pts = chain_profile(&MorphShape::from_angles([-90.0, 0.0, 0.0]), &spec);
        assert!((pts[3][1] + 0.210).abs() < 1e-12);
        assert!(pts[3][0].abs() < 1e-12);
    }

    #[test]
    fn tip_height_matches_hand_trigonometry() {
        let spec = PanelChainSpec::default();
        let pts = chain_profile(&MorphShape::from_angles([13.0, 15.0, 15.0]), &spec);
        // Independent route: cumulative slopes 13°, 28°, 43°.
        let expected =
            0.070 * (13f64.to_radians().sin() + 28f64.to_radians().sin() + 43f64.to_radians().sin());
        assert!((pts[3][1] - expected).abs() < 1e-12);
        assert!((expected - 0.0963).abs() < 1e-4);
    }

    #[test]
    fn neutral_is_admissible() {
        assert!(is_admissible(&MorphShape::neutral(), &PanelChainSpec::default()));
    }

    #[test]
    fn roof_rise_limit_rejects_extreme_upward_shape() {
        let spec = PanelChainSpec::default();
        let up = MorphShape::from_indices([64, 64, 64]).unwrap();
        assert!(!is_admissible(&up, &spec));
    }

    #[test]
    fn bed_clearance_rejects_extreme_downward_shape() {
        let spec = PanelChainSpec::default();
        let down = MorphShape::from_indices([0, 0, 0]).unwrap();
        assert!(!is_admissible(&down, &spec));
    }

    #[test]
    fn out_of_range_angles_return_false_not_error() {
        let spec = PanelChainSpec::default();
        assert!(!is_admissible(&MorphShape::from_angles([14.0, 0.0, 0.0]), &spec));
        assert!(!is_admissible(&MorphShape::from_angles([0.0, -31.0, 0.0]), &spec));
    }

    #[test]
    fn unconstrained_grid_has_published_count() {
        let domain = Domain::new(PanelChainSpec::unconstrained()).unwrap();
        assert_eq!(domain.admissible_count(), 274_625);
    }

    #[test]
    fn zero_rise_allowance_keeps_apex_nonpositive() {
        let spec = PanelChainSpec {
            max_rise_above_roof_m: 1e-12,
            ..PanelChainSpec::unconstrained()
        };
        for shape in enumerate_grid(&spec).take(5_000) {
            let apex = chain_profile(&shape, &spec)
                .iter()
                .map(|p| p[1])
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(apex <= 1e-9, "apex {apex} above roof for {:?}", shape.indices);
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_round_trips() {
        let spec = PanelChainSpec::unconstrained();
        let mut previous: Option<[u8; 3]> = None;
        for shape in enumerate_grid(&spec) {
            let indices = shape.indices.expect("grid shapes carry indices");
            if let Some(prev) = previous {
                assert!(prev < indices, "order violated: {prev:?} then {indices:?}");
            }
            assert_eq!(MorphShape::grid_indices_of(shape.theta_deg), Some(indices));
            previous = Some(indices);
        }
    }

    #[test]
    fn admissibility_is_monotone_in_roof_allowance() {
        let tight = PanelChainSpec::default();
        let loose = PanelChainSpec { max_rise_above_roof_m: 0.05, ..tight };
        for shape in enumerate_grid(&tight) {
            assert!(is_admissible(&shape, &loose));
        }
    }

    #[test]
    fn default_domain_is_strict_subset_of_grid() {
        let n = Domain::new(PanelChainSpec::default()).unwrap().admissible_count();
        assert!(n > 0 && n < 274_625, "default domain size {n}");
    }

    #[test]
    fn shape_json_format() {
        let s = MorphShape::from_indices([10, 52, 60]).unwrap();
        let json = serde_json::to_value(s).unwrap();
        assert_eq!(json["indices"], serde_json::json!([10, 52, 60]));
        assert!((json["theta_deg"][0].as_f64().unwrap() - (-14.84375)).abs() < 1e-12);
    }

    #[test]
    fn grid_csv_header_and_row_count() {
        let mut buf = Vec::new();
        write_grid_csv(&PanelChainSpec::unconstrained(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "i1,i2,i3,theta1_deg,theta2_deg,theta3_deg,admissible"
        );
        assert_eq!(text.lines().count(), 1 + 274_625);
    }

    proptest! {
        #[test]
        fn index_round_trip(i1 in 0u8..=64, i2 in 0u8..=64, i3 in 0u8..=64) {
            let shape = MorphShape::from_indices([i1, i2, i3]).unwrap();
            prop_assert_eq!(MorphShape::grid_indices_of(shape.theta_deg), Some([i1, i2, i3]));
        }

        #[test]
        fn rotation_preserves_arc_length(
            t1 in -180.0f64..180.0, t2 in -180.0f64..180.0, t3 in -180.0f64..180.0
        ) {
            let spec = PanelChainSpec::default();
            let pts = chain_profile(&MorphShape::from_angles([t1, t2, t3]), &spec);
            let arc: f64 = pts.windows(2)
                .map(|w| ((w[1][0] - w[0][0]).powi(2) + (w[1][1] - w[0][1]).powi(2)).sqrt())
                .sum();
            prop_assert!((arc - 0.210).abs() < 1e-9);
        }
    }
}
