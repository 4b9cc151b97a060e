//! Hierarchical scene graph built from a floor plan.
//!
//! Layers: 1 = locations and objects, 2 = rooms, 3 = the building. Room
//! nodes come straight from the floor plan; location nodes are sampled on an
//! axis-aligned grid inside each room plus one node per door midpoint.

mod costs;
pub mod io;
mod path;

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{self, Point2};

pub use costs::{greedy_tour, tour_length, CostMatrix};
pub use io::{DsgDoc, FloorPlanDoc};

pub type NodeId = usize;
/// Room identifier as declared in the floor plan.
pub type RoomId = u32;

pub const LAYER_LOCATION: u8 = 1;
pub const LAYER_ROOM: u8 = 2;
pub const LAYER_BUILDING: u8 = 3;
pub const LOCATION_LABEL: &str = "location";

/// Distance kept between sampled location nodes and room walls.
pub const WALL_INSET_M: f64 = 0.3;
pub const DEFAULT_SPACING_M: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GraphNode {
    pub id: NodeId,
    pub layer: u8,
    pub position: Point2,
    /// Planar heading, radians. Stored, never used by planning.
    pub heading: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Room {
    pub id: RoomId,
    pub node: NodeId,
    pub label: String,
    pub polygon: Vec<Point2>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Door {
    pub rooms: [RoomId; 2],
    pub position: Point2,
    /// Recorded but not used for traversal.
    pub width_m: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredSceneGraph {
    name: String,
    nodes: Vec<GraphNode>,
    intra_edges: Vec<(NodeId, NodeId, f64)>,
    parents: Vec<Option<NodeId>>,
    adjacency: Vec<Vec<(NodeId, f64)>>,
    rooms: Vec<Room>,
    doors: Vec<Door>,
    spacing: Option<f64>,
}

impl LayeredSceneGraph {
    pub const LAYER_COUNT: u8 = 3;

    /// Builds the room and building layers from a floor-plan document.
    pub fn from_floor_plan(doc: &FloorPlanDoc) -> Result<Self> {
        let (rooms, doors) = validate_floor_plan(doc)?;
        let mut graph = LayeredSceneGraph {
            name: doc.name.clone(),
            nodes: Vec::new(),
            intra_edges: Vec::new(),
            parents: Vec::new(),
            adjacency: Vec::new(),
            rooms: Vec::new(),
            doors,
            spacing: None,
        };
        let n = rooms.len() as f64;
        let centroids: Vec<Point2> = rooms.iter().map(|(_, _, poly)| geometry::centroid(poly)).collect();
        let center = Point2::new(
            centroids.iter().map(|c| c.x).sum::<f64>() / n,
            centroids.iter().map(|c| c.y).sum::<f64>() / n,
        );
        let building = graph.push_node(LAYER_BUILDING, center, "building".into(), None);
        for ((id, label, polygon), c) in rooms.into_iter().zip(centroids) {
            let node = graph.push_node(LAYER_ROOM, c, label.clone(), Some(building));
            graph.rooms.push(Room {
                id,
                node,
                label,
                polygon,
            });
        }
        Ok(graph)
    }

    pub fn from_floor_plan_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_floor_plan(&FloorPlanDoc::from_path(path)?)
    }

    fn push_node(&mut self, layer: u8, position: Point2, label: String, parent: Option<NodeId>) -> NodeId {
        let id = self.nodes.len();
        self.nodes.push(GraphNode {
            id,
            layer,
            position,
            heading: 0.0,
            label,
        });
        self.parents.push(parent);
        self.adjacency.push(Vec::new());
        id
    }

    fn push_edge(&mut self, a: NodeId, b: NodeId) {
        let len = self.nodes[a].position.distance(&self.nodes[b].position);
        self.intra_edges.push((a, b, len));
        self.adjacency[a].push((b, len));
        self.adjacency[b].push((a, len));
    }

    /// Places location nodes on a grid of pitch `spacing` inside every room
    /// (inset [`WALL_INSET_M`] from the walls) and one node per door midpoint.
    pub fn sample_locations(&mut self, spacing: f64) -> Result<()> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::input("spacing", format!("must be positive, got {spacing}")));
        }
        if self.spacing.is_some() {
            return Err(Error::State("locations already sampled".into()));
        }
        for r in 0..self.rooms.len() {
            self.sample_room(r, spacing)?;
        }
        for d in 0..self.doors.len() {
            let door = self.doors[d].clone();
            let low = door.rooms[0].min(door.rooms[1]);
            let low_node = self.room(low).expect("validated door").node;
            let node = self.push_node(LAYER_LOCATION, door.position, LOCATION_LABEL.into(), Some(low_node));
            for rid in door.rooms {
                let target = self
                    .room_location_nodes(rid)
                    .into_iter()
                    .filter(|&n| n != node && !self.is_door_node(n))
                    .min_by(|&a, &b| {
                        let da = self.nodes[a].position.distance_sq(&door.position);
                        let db = self.nodes[b].position.distance_sq(&door.position);
                        da.total_cmp(&db).then(a.cmp(&b))
                    });
                match target {
                    Some(t) => self.push_edge(node, t),
                    None => {
                        return Err(Error::geometry(format!(
                            "door at {:?} touches room {rid} with no locations",
                            door.position
                        )))
                    }
                }
            }
        }
        self.spacing = Some(spacing);
        Ok(())
    }

    fn sample_room(&mut self, index: usize, spacing: f64) -> Result<()> {
        let room = self.rooms[index].clone();
        let (lo, hi) = geometry::bounds(&room.polygon);
        let (w, h) = (hi.x - lo.x, hi.y - lo.y);
        if spacing > w.max(h) {
            return Err(Error::geometry(format!(
                "room {} ({w:.2} x {h:.2} m) is smaller than the sampling spacing {spacing} m",
                room.id
            )));
        }
        let axis = |extent: f64| -> Option<(usize, f64)> {
            let usable = extent - 2.0 * WALL_INSET_M;
            if usable < 0.0 {
                return None;
            }
            let count = (usable / spacing + 1e-9).floor() as usize + 1;
            let offset = (extent - (count - 1) as f64 * spacing) / 2.0;
            Some((count, offset))
        };
        let (Some((nx, ox)), Some((ny, oy))) = (axis(w), axis(h)) else {
            return Err(Error::geometry(format!(
                "room {} is too narrow to hold a location node {WALL_INSET_M} m from its walls",
                room.id
            )));
        };
        let mut cells: BTreeMap<(usize, usize), NodeId> = BTreeMap::new();
        for j in 0..ny {
            for i in 0..nx {
                let p = Point2::new(lo.x + ox + i as f64 * spacing, lo.y + oy + j as f64 * spacing);
                if geometry::contains(&room.polygon, p)
                    && geometry::boundary_distance(&room.polygon, p) >= WALL_INSET_M - 1e-9
                {
                    let id = self.push_node(LAYER_LOCATION, p, LOCATION_LABEL.into(), Some(room.node));
                    cells.insert((i, j), id);
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::geometry(format!("room {} holds no location node", room.id)));
        }
        let grid: Vec<((usize, usize), NodeId)> = cells.iter().map(|(k, v)| (*k, *v)).collect();
        for ((i, j), id) in grid {
            if let Some(&right) = cells.get(&(i + 1, j)) {
                self.push_edge(id, right);
            }
            if let Some(&up) = cells.get(&(i, j + 1)) {
                self.push_edge(id, up);
            }
        }
        // The room's grid must be a single component.
        let members: Vec<NodeId> = cells.values().copied().collect();
        let start = members[0];
        let mut seen = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &(m, _) in &self.adjacency[n] {
                if !seen.contains(&m) {
                    seen.push(m);
                    queue.push_back(m);
                }
            }
        }
        if seen.len() != members.len() {
            return Err(Error::geometry(format!(
                "room {} location grid is disconnected ({} of {} nodes reachable)",
                room.id,
                seen.len(),
                members.len()
            )));
        }
        Ok(())
    }

    /// Adds an observed object as a layer-1 node linked to its nearest location node.
    pub fn insert_object_node(&mut self, object_class: &str, position: Point2) -> Result<NodeId> {
        if object_class.is_empty() {
            return Err(Error::input("object_class", "must be nonempty"));
        }
        let anchor = self
            .nearest_location(position)
            .ok_or_else(|| Error::State("cannot insert an object before locations are sampled".into()))?;
        let room_node = self.parents[anchor].expect("location nodes have a room parent");
        let id = self.push_node(LAYER_LOCATION, position, object_class.into(), Some(room_node));
        self.push_edge(id, anchor);
        Ok(id)
    }

    /// Location node nearest to `p`; ties go to the lowest id.
    pub fn nearest_location(&self, p: Point2) -> Option<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        for n in self.location_nodes() {
            let d = self.nodes[n].position.distance_sq(&p);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, n));
            }
        }
        best.map(|(_, n)| n)
    }

    /// Parent room of the location node nearest to `p`.
    pub fn nearest_room(&self, p: Point2) -> Option<RoomId> {
        self.nearest_location(p)
            .map(|n| self.room_of(n).expect("location nodes have a room"))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> Option<&GraphNode> {
        self.nodes.get(id)
    }

    pub fn intra_edges(&self) -> &[(NodeId, NodeId, f64)] {
        &self.intra_edges
    }

    /// `(child, parent)` pairs.
    pub fn parent_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parents.iter().enumerate().filter_map(|(c, p)| p.map(|p| (c, p)))
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parents.get(id).copied().flatten()
    }

    pub fn neighbors(&self, id: NodeId) -> &[(NodeId, f64)] {
        &self.adjacency[id]
    }

    pub fn rooms(&self) -> &[Room] {
        &self.rooms
    }

    /// Room ids in ascending order; the index order used by beliefs and cost matrices.
    pub fn room_ids(&self) -> Vec<RoomId> {
        self.rooms.iter().map(|r| r.id).collect()
    }

    pub fn room(&self, id: RoomId) -> Option<&Room> {
        self.rooms.iter().find(|r| r.id == id)
    }

    pub fn room_index(&self, id: RoomId) -> Option<usize> {
        self.rooms.iter().position(|r| r.id == id)
    }

    pub fn doors(&self) -> &[Door] {
        &self.doors
    }

    pub fn spacing(&self) -> Option<f64> {
        self.spacing
    }

    /// Room containing a layer-1 node, via its parent edge.
    pub fn room_of(&self, node: NodeId) -> Option<RoomId> {
        let parent = self.parent(node)?;
        self.rooms.iter().find(|r| r.node == parent).map(|r| r.id)
    }

    /// Room whose polygon contains `p`, falling back to [`Self::nearest_room`].
    pub fn room_at(&self, p: Point2) -> Option<RoomId> {
        self.rooms
            .iter()
            .find(|r| geometry::contains(&r.polygon, p))
            .map(|r| r.id)
            .or_else(|| self.nearest_room(p))
    }

    pub fn is_location(&self, id: NodeId) -> bool {
        let n = &self.nodes[id];
        n.layer == LAYER_LOCATION && n.label == LOCATION_LABEL
    }

    fn is_door_node(&self, id: NodeId) -> bool {
        self.is_location(id) && self.doors.iter().any(|d| d.position == self.nodes[id].position)
    }

    pub fn location_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| self.is_location(i))
    }

    pub fn object_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].layer == LAYER_LOCATION && !self.is_location(i))
    }

    /// Location nodes parented to `room`, ascending id.
    pub fn room_location_nodes(&self, room: RoomId) -> Vec<NodeId> {
        let Some(r) = self.room(room) else {
            return Vec::new();
        };
        self.location_nodes()
            .filter(|&n| self.parents[n] == Some(r.node))
            .collect()
    }

    /// The room's reference location: its location node nearest the room centroid.
    pub fn room_anchor(&self, room: RoomId) -> Option<NodeId> {
        let r = self.room(room)?;
        let c = self.nodes[r.node].position;
        self.room_location_nodes(room).into_iter().min_by(|&a, &b| {
            let da = self.nodes[a].position.distance_sq(&c);
            let db = self.nodes[b].position.distance_sq(&c);
            da.total_cmp(&db).then(a.cmp(&b))
        })
    }

    /// Serializes to the persisted document form.
    pub fn to_doc(&self) -> DsgDoc {
        let rooms = self
            .rooms
            .iter()
            .map(|r| io::RoomDoc {
                id: r.id,
                label: r.label.clone(),
                polygon: r.polygon.iter().map(|&p| p.into()).collect(),
            })
            .collect();
        let doors = self
            .doors
            .iter()
            .map(|d| io::DoorDoc {
                rooms: d.rooms,
                position: d.position.into(),
                width_m: d.width_m,
            })
            .collect();
        let locations = self.spacing.map(|spacing| io::LocationsDoc {
            spacing,
            nodes: self
                .location_nodes()
                .map(|n| io::LocationNodeDoc {
                    id: n,
                    position: self.nodes[n].position,
                    heading: self.nodes[n].heading,
                    room: self.room_of(n).expect("location has room"),
                })
                .collect(),
            edges: self
                .intra_edges
                .iter()
                .filter(|(a, b, _)| self.is_location(*a) && self.is_location(*b))
                .copied()
                .collect(),
        });
        let objects = self
            .object_nodes()
            .map(|n| {
                let &(anchor, anchor_length) = self.adjacency[n].first().expect("object has an anchor edge");
                io::ObjectNodeDoc {
                    id: n,
                    class: self.nodes[n].label.clone(),
                    position: self.nodes[n].position,
                    heading: self.nodes[n].heading,
                    room: self.room_of(n).expect("object has room"),
                    anchor,
                    anchor_length,
                }
            })
            .collect();
        DsgDoc {
            schema: io::DSG_SCHEMA.into(),
            name: self.name.clone(),
            rooms,
            doors,
            locations,
            objects,
        }
    }

    /// Rebuilds a graph from its persisted form, checking every invariant.
    pub fn from_doc(doc: &DsgDoc) -> Result<Self> {
        if doc.schema != io::DSG_SCHEMA {
            return Err(Error::input(
                "schema",
                format!("expected '{}', found '{}'", io::DSG_SCHEMA, doc.schema),
            ));
        }
        let plan = FloorPlanDoc {
            name: doc.name.clone(),
            rooms: doc.rooms.clone(),
            doors: doc.doors.clone(),
        };
        let mut graph = Self::from_floor_plan(&plan)?;
        // Locations and objects carry explicit ids; interleave them in id order.
        enum Pending<'a> {
            Loc(&'a io::LocationNodeDoc),
            Obj(&'a io::ObjectNodeDoc),
        }
        let mut pending: BTreeMap<usize, Pending> = BTreeMap::new();
        if let Some(locs) = &doc.locations {
            for n in &locs.nodes {
                pending.insert(n.id, Pending::Loc(n));
            }
        }
        for o in &doc.objects {
            if pending.insert(o.id, Pending::Obj(o)).is_some() {
                return Err(Error::input(format!("objects[id={}]", o.id), "duplicate node id"));
            }
        }
        let mut edges_by_rank: Vec<(usize, usize, usize, f64)> = Vec::new();
        if let Some(locs) = &doc.locations {
            for (rank, &(a, b, len)) in locs.edges.iter().enumerate() {
                edges_by_rank.push((rank, a, b, len));
            }
        }
        for (id, item) in &pending {
            if *id != graph.nodes.len() {
                return Err(Error::input(
                    format!("node id {id}"),
                    format!("ids must be contiguous from {}", graph.nodes.len()),
                ));
            }
            match item {
                Pending::Loc(n) => {
                    let room_node = graph
                        .room(n.room)
                        .ok_or_else(|| Error::input(format!("locations.nodes[id={id}].room"), "unknown room"))?
                        .node;
                    let nid = graph.push_node(LAYER_LOCATION, n.position, LOCATION_LABEL.into(), Some(room_node));
                    graph.nodes[nid].heading = n.heading;
                }
                Pending::Obj(o) => {
                    let room_node = graph
                        .room(o.room)
                        .ok_or_else(|| Error::input(format!("objects[id={id}].room"), "unknown room"))?
                        .node;
                    let nid = graph.push_node(LAYER_LOCATION, o.position, o.class.clone(), Some(room_node));
                    graph.nodes[nid].heading = o.heading;
                }
            }
        }
        let node_count = graph.nodes.len();
        let check_edge = |field: String, a: usize, b: usize, len: f64, graph: &Self| -> Result<()> {
            if a >= node_count || b >= node_count {
                return Err(Error::input(field, "edge endpoint out of range"));
            }
            let expect = graph.nodes[a].position.distance(&graph.nodes[b].position);
            if (expect - len).abs() > 1e-9 {
                return Err(Error::input(
                    field,
                    format!("length {len} differs from distance {expect}"),
                ));
            }
            Ok(())
        };
        // Object anchor edges are created right after their node; replay the
        // original insertion order: location edges first, then objects by id.
        for (rank, a, b, len) in edges_by_rank {
            check_edge(format!("locations.edges[{rank}]"), a, b, len, &graph)?;
            if !graph.is_location(a) || !graph.is_location(b) {
                return Err(Error::input(
                    format!("locations.edges[{rank}]"),
                    "endpoints must be location nodes",
                ));
            }
            graph.intra_edges.push((a, b, len));
            graph.adjacency[a].push((b, len));
            graph.adjacency[b].push((a, len));
        }
        for o in &doc.objects {
            check_edge(
                format!("objects[id={}].anchor", o.id),
                o.id,
                o.anchor,
                o.anchor_length,
                &graph,
            )?;
            graph.intra_edges.push((o.id, o.anchor, o.anchor_length));
            graph.adjacency[o.id].push((o.anchor, o.anchor_length));
            graph.adjacency[o.anchor].push((o.id, o.anchor_length));
        }
        graph.spacing = doc.locations.as_ref().map(|l| l.spacing);
        Ok(graph)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(&self.to_doc()).expect("graph serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let doc: DsgDoc = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        Self::from_doc(&doc)
    }
}

type ValidatedRooms = Vec<(RoomId, String, Vec<Point2>)>;

fn validate_floor_plan(doc: &FloorPlanDoc) -> Result<(ValidatedRooms, Vec<Door>)> {
    if doc.rooms.is_empty() {
        return Err(Error::input("rooms", "floor plan declares no rooms"));
    }
    let mut rooms: ValidatedRooms = Vec::with_capacity(doc.rooms.len());
    for (i, r) in doc.rooms.iter().enumerate() {
        if r.label.trim().is_empty() {
            return Err(Error::input(format!("rooms[{i}].label"), "must be nonempty"));
        }
        if rooms.iter().any(|(id, _, _)| *id == r.id) {
            return Err(Error::input(
                format!("rooms[{i}].id"),
                format!("duplicate room id {}", r.id),
            ));
        }
        if r.polygon.len() < 3 {
            return Err(Error::input(format!("rooms[{i}].polygon"), "needs at least 3 vertices"));
        }
        let poly = r
            .polygon
            .iter()
            .enumerate()
            .map(|(k, p)| p.to_point(&format!("rooms[{i}].polygon[{k}]")))
            .collect::<Result<Vec<_>>>()?;
        if geometry::signed_area(&poly).abs() < 1e-9 {
            return Err(Error::input(format!("rooms[{i}].polygon"), "polygon has zero area"));
        }
        if !geometry::is_simple(&poly) {
            return Err(Error::input(format!("rooms[{i}].polygon"), "polygon is not simple"));
        }
        rooms.push((r.id, r.label.clone(), poly));
    }
    for a in 0..rooms.len() {
        for b in (a + 1)..rooms.len() {
            if geometry::interiors_overlap(&rooms[a].2, &rooms[b].2) {
                return Err(Error::geometry(format!(
                    "rooms {} and {} overlap",
                    rooms[a].0, rooms[b].0
                )));
            }
        }
    }
    let mut doors = Vec::with_capacity(doc.doors.len());
    for (i, d) in doc.doors.iter().enumerate() {
        for (k, rid) in d.rooms.iter().enumerate() {
            if !rooms.iter().any(|(id, _, _)| id == rid) {
                return Err(Error::input(
                    format!("doors[{i}].rooms[{k}]"),
                    format!("unknown room id {rid}"),
                ));
            }
        }
        if d.rooms[0] == d.rooms[1] {
            return Err(Error::input(
                format!("doors[{i}].rooms"),
                "a door must join two distinct rooms",
            ));
        }
        if !(d.width_m > 0.0 && d.width_m.is_finite()) {
            return Err(Error::input(format!("doors[{i}].width_m"), "must be positive"));
        }
        doors.push(Door {
            rooms: d.rooms,
            position: d.position.to_point(&format!("doors[{i}].position"))?,
            width_m: d.width_m,
        });
    }
    rooms.sort_by_key(|(id, _, _)| *id);
    Ok((rooms, doors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use io::{DoorDoc, RawPoint, RoomDoc};

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Vec<RawPoint> {
        [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]
            .iter()
            .map(|p| RawPoint(p.to_vec()))
            .collect()
    }

    fn single_room() -> FloorPlanDoc {
        FloorPlanDoc {
            name: "single".into(),
            rooms: vec![RoomDoc {
                id: 0,
                label: "office".into(),
                polygon: rect(0.0, 0.0, 4.0, 4.0),
            }],
            doors: vec![],
        }
    }

    fn two_rooms() -> FloorPlanDoc {
        FloorPlanDoc {
            name: "pair".into(),
            rooms: vec![
                RoomDoc {
                    id: 0,
                    label: "kitchen".into(),
                    polygon: rect(0.0, 0.0, 4.0, 4.0),
                },
                RoomDoc {
                    id: 1,
                    label: "office".into(),
                    polygon: rect(4.0, 0.0, 8.0, 4.0),
                },
            ],
            doors: vec![DoorDoc {
                rooms: [0, 1],
                position: RawPoint(vec![4.0, 2.0]),
                width_m: 1.0,
            }],
        }
    }

    #[test]
    fn single_room_node_at_centroid() {
        let g = LayeredSceneGraph::from_floor_plan(&single_room()).unwrap();
        assert_eq!(g.rooms().len(), 1);
        let room = &g.rooms()[0];
        assert_eq!(g.nodes()[room.node].position, Point2::new(2.0, 2.0));
        assert_eq!(g.nodes()[room.node].layer, LAYER_ROOM);
        assert_eq!(g.parent(room.node), Some(0));
        assert_eq!(g.location_nodes().count(), 0);
    }

    #[test]
    fn four_meter_room_at_unit_spacing_has_sixteen_nodes() {
        // usable extent 4 - 2*0.3 = 3.4 m -> 4 columns at 1 m pitch, centered at 0.5..3.5
        let mut g = LayeredSceneGraph::from_floor_plan(&single_room()).unwrap();
        g.sample_locations(1.0).unwrap();
        let locs: Vec<_> = g.location_nodes().collect();
        assert_eq!(locs.len(), 16);
        let xs: Vec<f64> = locs.iter().take(4).map(|&n| g.nodes()[n].position.x).collect();
        assert_eq!(xs, vec![0.5, 1.5, 2.5, 3.5]);
        // 4x4 grid has 2*4*3 = 24 edges
        assert_eq!(g.intra_edges().len(), 24);
    }

    #[test]
    fn spacing_larger_than_room_is_geometry_error() {
        let mut g = LayeredSceneGraph::from_floor_plan(&single_room()).unwrap();
        assert!(matches!(g.sample_locations(5.0), Err(Error::Geometry { .. })));
        assert!(matches!(g.sample_locations(0.0), Err(Error::Input { .. })));
    }

    #[test]
    fn door_links_both_rooms() {
        let mut g = LayeredSceneGraph::from_floor_plan(&two_rooms()).unwrap();
        let r0 = g.room(0).unwrap().node;
        g.sample_locations(1.0).unwrap();
        let door = g
            .location_nodes()
            .find(|&n| g.nodes()[n].position == Point2::new(4.0, 2.0))
            .unwrap();
        assert_eq!(g.parent(door), Some(r0));
        let rooms: Vec<_> = g.neighbors(door).iter().map(|&(m, _)| g.room_of(m).unwrap()).collect();
        assert_eq!(rooms, vec![0, 1]);
        // nearest grid nodes are (3.5, 1.5)/(3.5, 2.5) at distance sqrt(0.5)
        for &(_, len) in g.neighbors(door) {
            assert!((len - 0.5f64.sqrt()).abs() < 1e-12);
        }
        assert_eq!(g.nearest_room(Point2::new(4.0, 2.0)), Some(0));
    }

    #[test]
    fn rejects_bad_documents() {
        let mut doc = two_rooms();
        doc.doors[0].rooms = [0, 7];
        match LayeredSceneGraph::from_floor_plan(&doc) {
            Err(Error::Input { field, .. }) => assert_eq!(field, "doors[0].rooms[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let mut doc = two_rooms();
        doc.rooms[1].polygon = rect(3.0, 0.0, 7.0, 4.0);
        match LayeredSceneGraph::from_floor_plan(&doc) {
            Err(Error::Geometry { message }) => assert!(message.contains("rooms 0 and 1")),
            other => panic!("unexpected {other:?}"),
        }
        let mut doc = single_room();
        doc.rooms[0].label = String::new();
        assert!(matches!(
            LayeredSceneGraph::from_floor_plan(&doc),
            Err(Error::Input { .. })
        ));
    }

    #[test]
    fn insert_object_requires_locations() {
        let mut g = LayeredSceneGraph::from_floor_plan(&single_room()).unwrap();
        assert!(matches!(
            g.insert_object_node("mug", Point2::new(1.0, 1.0)),
            Err(Error::State(_))
        ));
        g.sample_locations(1.0).unwrap();
        let id = g.insert_object_node("mug", Point2::new(1.5, 1.5)).unwrap();
        assert_eq!(g.neighbors(id)[0].1, 0.0);
        assert_eq!(g.room_of(id), Some(0));
        assert_eq!(g.object_nodes().collect::<Vec<_>>(), vec![id]);
    }
}
