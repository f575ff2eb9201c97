//! Gridworld generator: a robot in a walled room, moving T/D/L/R or staying,
//! with qualitative slip and either exact or wall-configuration observations.
//!
//! Cells are addressed (row, col), 1-based, row 1 at the top. A move toward
//! a free neighbor reaches it with full possibility and may slip into the
//! lateral neighbors of the reached square (those not separated from it by
//! a wall) at the configured slip level; a move into a wall, an obstacle or
//! the boundary is a deterministic self-loop, and Stay never moves. The
//! utility is top at the goal and a configurable level at the goal's
//! orthogonal neighbors.
//!
//! The builtin [`paper_3x3`] room has obstacles at (1,2) and (3,1), a wall
//! segment between (2,2) and (2,3), the goal at (3,3) and the scale
//! {0, 0.2, 0.5, 0.8, 1}.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::model::{ModelBuildError, PiPomdpModel};
use crate::scale::Scale;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid must be at least 1x1")]
    EmptyGrid,
    #[error("cell ({0},{1}) is out of bounds")]
    OutOfBounds(usize, usize),
    #[error("goal cell is an obstacle")]
    GoalIsObstacle,
    #[error("wall between ({0:?}) and ({1:?}) does not join adjacent cells")]
    NotAdjacent(Cell, Cell),
    #[error("every cell is an obstacle")]
    NoFreeCells,
    #[error(transparent)]
    Build(#[from] ModelBuildError),
}

pub type Cell = (usize, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// one observation per state, identifying it exactly
    Full,
    /// the noise-free four-bit wall pattern around the occupied cell
    WallConfiguration,
}

/// Room description consumed by [`generate_gridworld`].
#[derive(Debug, Clone)]
pub struct GridworldSpec {
    pub width: usize,
    pub height: usize,
    /// cells removed from the state space
    pub obstacles: BTreeSet<Cell>,
    /// wall segments between adjacent free cells
    pub walls: BTreeSet<(Cell, Cell)>,
    pub goal: Cell,
    pub scale_labels: Vec<String>,
    pub slip_label: String,
    pub neighbor_goal_label: String,
    pub observation_mode: ObservationMode,
}

impl GridworldSpec {
    /// The 3x3 room of the worked example: two obstacle squares, one
    /// interior wall, goal in the down-right corner.
    pub fn paper_3x3() -> GridworldSpec {
        GridworldSpec {
            width: 3,
            height: 3,
            obstacles: [(1, 2), (3, 1)].into_iter().collect(),
            walls: [((2, 2), (2, 3))].into_iter().collect(),
            goal: (3, 3),
            scale_labels: ["0", "0.2", "0.5", "0.8", "1"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            slip_label: "0.2".to_string(),
            neighbor_goal_label: "0.5".to_string(),
            observation_mode: ObservationMode::WallConfiguration,
        }
    }
}

const DIRS: [(&str, (isize, isize)); 4] = [
    ("T", (-1, 0)),
    ("D", (1, 0)),
    ("L", (0, -1)),
    ("R", (0, 1)),
];

fn cell_name(c: Cell) -> String {
    format!("s{}{}", c.0, c.1)
}

struct Room<'a> {
    spec: &'a GridworldSpec,
}

impl Room<'_> {
    fn in_bounds(&self, r: isize, c: isize) -> bool {
        r >= 1 && c >= 1 && r as usize <= self.spec.height && c as usize <= self.spec.width
    }

    fn free(&self, r: isize, c: isize) -> bool {
        self.in_bounds(r, c) && !self.spec.obstacles.contains(&(r as usize, c as usize))
    }

    fn walled(&self, a: Cell, b: Cell) -> bool {
        self.spec.walls.contains(&(a, b)) || self.spec.walls.contains(&(b, a))
    }

    /// Whether a robot in `from` can pass to the adjacent cell `(r, c)`.
    fn open(&self, from: Cell, r: isize, c: isize) -> bool {
        self.free(r, c) && !self.walled(from, (r as usize, c as usize))
    }

    /// Wall bits N,E,S,W around a free cell.
    fn wall_pattern(&self, cell: Cell) -> String {
        let (r, c) = (cell.0 as isize, cell.1 as isize);
        let sides = [("N", (r - 1, c)), ("E", (r, c + 1)), ("S", (r + 1, c)), ("W", (r, c - 1))];
        let mut pat = String::new();
        for (name, (nr, nc)) in sides {
            if !self.open(cell, nr, nc) {
                pat.push_str(name);
            }
        }
        if pat.is_empty() {
            pat.push_str("none");
        }
        pat
    }
}

/// Builds the possibilistic POMDP of a room.
pub fn generate_gridworld(spec: &GridworldSpec) -> Result<PiPomdpModel, GridError> {
    if spec.width == 0 || spec.height == 0 {
        return Err(GridError::EmptyGrid);
    }
    for &(r, c) in &spec.obstacles {
        if r < 1 || c < 1 || r > spec.height || c > spec.width {
            return Err(GridError::OutOfBounds(r, c));
        }
    }
    if spec.goal.0 < 1 || spec.goal.1 < 1 || spec.goal.0 > spec.height || spec.goal.1 > spec.width {
        return Err(GridError::OutOfBounds(spec.goal.0, spec.goal.1));
    }
    if spec.obstacles.contains(&spec.goal) {
        return Err(GridError::GoalIsObstacle);
    }
    for &(a, b) in &spec.walls {
        let dr = a.0.abs_diff(b.0);
        let dc = a.1.abs_diff(b.1);
        if dr + dc != 1 {
            return Err(GridError::NotAdjacent(a, b));
        }
    }
    let room = Room { spec };
    let cells: Vec<Cell> = (1..=spec.height)
        .flat_map(|r| (1..=spec.width).map(move |c| (r, c)))
        .filter(|cell| !spec.obstacles.contains(cell))
        .collect();
    if cells.is_empty() {
        return Err(GridError::NoFreeCells);
    }

    let scale = Scale::new(spec.scale_labels.clone()).map_err(ModelBuildError::from)?;
    let top_label = scale.labels().last().unwrap().clone();
    let mut b = PiPomdpModel::builder(scale);
    for &cell in &cells {
        b.base().add_state(&cell_name(cell))?;
    }
    for (name, _) in DIRS {
        b.base().add_action(name)?;
    }
    b.base().add_action("S")?;

    for &cell in &cells {
        let from = cell_name(cell);
        let (r, c) = (cell.0 as isize, cell.1 as isize);
        for (action, (dr, dc)) in DIRS {
            let (tr, tc) = (r + dr, c + dc);
            if !room.open(cell, tr, tc) {
                b.base().set_trans(&from, action, &from, &top_label)?;
                continue;
            }
            let target = (tr as usize, tc as usize);
            b.base().set_trans(&from, action, &cell_name(target), &top_label)?;
            // lateral drift around the reached square
            for (lr, lc) in [(dc, dr), (-dc, -dr)] {
                let (vr, vc) = (tr + lr, tc + lc);
                if room.open(target, vr, vc) {
                    b.base().set_trans(
                        &from,
                        action,
                        &cell_name((vr as usize, vc as usize)),
                        &spec.slip_label,
                    )?;
                }
            }
        }
        b.base().set_trans(&from, "S", &from, &top_label)?;
    }

    b.base().set_util(&cell_name(spec.goal), &top_label)?;
    let (gr, gc) = (spec.goal.0 as isize, spec.goal.1 as isize);
    for (dr, dc) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
        if room.free(gr + dr, gc + dc) {
            let neighbor = ((gr + dr) as usize, (gc + dc) as usize);
            b.base()
                .set_util(&cell_name(neighbor), &spec.neighbor_goal_label)?;
        }
    }

    let all_actions: Vec<&str> = DIRS.iter().map(|(n, _)| *n).chain(["S"]).collect();
    match spec.observation_mode {
        ObservationMode::Full => {
            for &cell in &cells {
                b.add_observation(&format!("at-{}", cell_name(cell)))?;
            }
            for &cell in &cells {
                for &a in &all_actions {
                    b.set_obs(
                        &cell_name(cell),
                        a,
                        &format!("at-{}", cell_name(cell)),
                        &top_label,
                    )?;
                }
            }
        }
        ObservationMode::WallConfiguration => {
            let mut seen = BTreeSet::new();
            for &cell in &cells {
                seen.insert(room.wall_pattern(cell));
            }
            for pat in &seen {
                b.add_observation(pat)?;
            }
            for &cell in &cells {
                let pat = room.wall_pattern(cell);
                for &a in &all_actions {
                    b.set_obs(&cell_name(cell), a, &pat, &top_label)?;
                }
            }
        }
    }
    Ok(b.build()?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paper_room_validates_and_has_the_quoted_utilities() {
        let model = generate_gridworld(&GridworldSpec::paper_3x3()).unwrap();
        assert!(model.validate().is_ok());
        assert_eq!(model.n_states(), 7);
        let mu = |name: &str| {
            let s = model.base().state_id(name).unwrap();
            model.scale().label(model.base().util(s)).to_string()
        };
        assert_eq!(mu("s33"), "1");
        assert_eq!(mu("s23"), "0.5");
        assert_eq!(mu("s32"), "0.5");
        for s in ["s11", "s13", "s21", "s22"] {
            assert_eq!(mu(s), "0");
        }
    }

    #[test]
    fn paper_room_transition_facts() {
        let model = generate_gridworld(&GridworldSpec::paper_3x3()).unwrap();
        let base = model.base();
        let t = |from: &str, a: &str, to: &str| {
            let s = base.state_id(from).unwrap();
            let aid = base.action_id(a).unwrap();
            let s2 = base.state_id(to).unwrap();
            base.scale().label(base.trans(s, aid, s2)).to_string()
        };
        // moving down from the top-left corner may drift right
        assert_eq!(t("s11", "D", "s21"), "1");
        assert_eq!(t("s11", "D", "s22"), "0.2");
        // the wall between s22 and s23 blocks the drift of D from s13
        assert_eq!(t("s13", "D", "s23"), "1");
        assert_eq!(t("s13", "D", "s22"), "0");
        // R from s22 runs into the wall: deterministic self-loop
        assert_eq!(t("s22", "R", "s22"), "1");
        // blocked moves at the goal are certain self-loops
        for a in ["D", "R", "S"] {
            assert_eq!(t("s33", a, "s33"), "1");
        }
        assert_eq!(t("s33", "T", "s23"), "1");
        assert_eq!(t("s33", "T", "s22"), "0");
    }

    #[test]
    fn paper_room_wall_observations_pair_the_right_cells() {
        let model = generate_gridworld(&GridworldSpec::paper_3x3()).unwrap();
        assert_eq!(model.n_observations(), 5);
        let pat = |name: &str| {
            let s = model.base().state_id(name).unwrap();
            (0..model.n_observations())
                .find(|&o| model.obs(s, 0, o).is_top())
                .map(|o| model.observation_name(o).to_string())
                .unwrap()
        };
        assert_eq!(pat("s11"), pat("s13"));
        assert_eq!(pat("s21"), pat("s32"));
        let distinct: std::collections::BTreeSet<String> =
            ["s11", "s21", "s22", "s23", "s33"].iter().map(|s| pat(s)).collect();
        assert_eq!(distinct.len(), 5);
    }

    #[test]
    fn one_by_one_grid_is_all_self_loops() {
        let spec = GridworldSpec {
            width: 1,
            height: 1,
            obstacles: BTreeSet::new(),
            walls: BTreeSet::new(),
            goal: (1, 1),
            scale_labels: vec!["0".into(), "0.2".into(), "1".into()],
            slip_label: "0.2".into(),
            neighbor_goal_label: "0.2".into(),
            observation_mode: ObservationMode::WallConfiguration,
        };
        let model = generate_gridworld(&spec).unwrap();
        assert!(model.validate().is_ok());
        assert_eq!(model.n_states(), 1);
        for a in 0..5 {
            assert!(model.base().trans(0, a, 0).is_top());
        }
        assert_eq!(model.n_observations(), 1);
        assert_eq!(model.observation_name(0), "NESW");
    }

    #[test]
    fn bad_specs_are_rejected() {
        let mut spec = GridworldSpec::paper_3x3();
        spec.goal = (1, 2);
        assert_eq!(generate_gridworld(&spec), Err(GridError::GoalIsObstacle));
        let mut spec = GridworldSpec::paper_3x3();
        spec.goal = (9, 9);
        assert!(matches!(
            generate_gridworld(&spec),
            Err(GridError::OutOfBounds(9, 9))
        ));
        let mut spec = GridworldSpec::paper_3x3();
        spec.walls.insert(((1, 1), (3, 3)));
        assert!(matches!(
            generate_gridworld(&spec),
            Err(GridError::NotAdjacent(_, _))
        ));
    }

    #[test]
    fn full_observation_mode_identifies_states() {
        let mut spec = GridworldSpec::paper_3x3();
        spec.observation_mode = ObservationMode::Full;
        let model = generate_gridworld(&spec).unwrap();
        assert_eq!(model.n_observations(), model.n_states());
        assert!(model.validate().is_ok());
    }
}
