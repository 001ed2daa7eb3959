"""Candidate-configuration generators over visibility volumes.

Four strategies produce per-target clusters of vehicle configurations:

* overhead: headings fanned out directly above each target at a shared
  altitude (degenerate neighborhoods, one position per target);
* entry pose: points on the boundary of each volume's cross-section at an
  optimized shared altitude, headings spanning tangent to inward;
* random face: positions drawn uniformly over the volume surface by
  area-weighted face selection and barycentric warping;
* edge: boundary points of each volume's lowest cross-section;
* global weighted face: boundary points spread over a shared altitude grid,
  allocated per volume in proportion to the total cross-section perimeter
  of all volumes at each altitude.

Cross-sections with several loops split their point budget across loops in
proportion to loop perimeter.  All generators are deterministic: random
draws use a per-volume stream derived from (seed, volume index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dubins import Configuration
from .errors import InfeasibleError
from .geom import (Polygon2, TriMesh, polygon_area, polygon_perimeter,
                   slice_mesh, tangent_angle, uniform_perimeter_points,
                   mesh_face_areas)

TWO_PI = 2.0 * math.pi

# relative offset pushing boundary slice planes into the volume
EDGE_OFFSET = 1e-7


@dataclass(frozen=True)
class SamplingParams:
    """Sample counts and pitch range shared by the cluster generators."""

    n_pts: int = 8
    n_psi: int = 4
    n_gamma: int = 1
    n_slice: int = 8
    gamma_min: float = 0.0
    gamma_max: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if min(self.n_pts, self.n_psi, self.n_gamma) < 1:
            raise ValueError("n_pts, n_psi and n_gamma must all be >= 1")
        if self.n_slice < 2:
            raise ValueError("need n_slice >= 2")
        if self.gamma_min > self.gamma_max:
            raise ValueError("need gamma_min <= gamma_max")


@dataclass
class ClusterSamples:
    """Per-target configuration clusters; cluster index identifies the target."""

    clusters: list[list[Configuration]]

    def __len__(self) -> int:
        return len(self.clusters)

    def counts(self) -> list[int]:
        return [len(c) for c in self.clusters]

    def to_dict(self) -> dict:
        return {
            "clusters": [
                [[c.x, c.y, c.z, c.psi, c.gamma] for c in cluster]
                for cluster in self.clusters
            ]
        }


def pitch_values(params: SamplingParams) -> np.ndarray:
    """Evenly spaced pitches from gamma_min to gamma_max (gamma_min if one)."""
    k = np.arange(params.n_gamma)
    span = params.gamma_max - params.gamma_min
    return params.gamma_min + k * span / max(params.n_gamma - 1, 1)


def uniform_headings(n_psi: int) -> np.ndarray:
    """Headings 2*pi*j/n for j in 0..n-1."""
    return TWO_PI * np.arange(n_psi) / n_psi


def entry_headings(psi_q: float, n_psi: int) -> np.ndarray:
    """Headings psi_q + j*pi/max(n-1, 1): tangent through inward-pointing."""
    j = np.arange(n_psi)
    return psi_q + j * math.pi / max(n_psi - 1, 1)


def allocate_proportional(n: int, weights, min_one: bool = False) -> list[int]:
    """Largest-remainder apportionment of n items over weights.

    With ``min_one`` every positive-weight bin gets at least one item when
    n is large enough; zero or all-zero weights fall back to an even split.
    """
    w = np.asarray(weights, dtype=float)
    if len(w) == 0:
        raise ValueError("no bins to allocate over")
    total = w.sum()
    if total <= 0:
        w = np.ones_like(w)
        total = w.sum()
    quota = n * w / total
    alloc = np.floor(quota).astype(int)
    rem = n - alloc.sum()
    if rem > 0:
        order = np.argsort(-(quota - alloc), kind="stable")
        alloc[order[:rem]] += 1
    if min_one and n >= len(w):
        while (alloc == 0).any():
            give = int(np.argmax(alloc == 0))
            take = int(np.argmax(alloc))
            alloc[take] -= 1
            alloc[give] += 1
    return alloc.tolist()


def _slice_loops(volume: TriMesh, z: float) -> list[Polygon2]:
    return slice_mesh(volume, z)


def _loop_boundary_configs(loops: list[Polygon2], n_pts: int, z: float,
                           n_psi: int, pitches) -> list[Configuration]:
    """Entry-pose configurations on one or more cross-section loops."""
    out: list[Configuration] = []
    share = allocate_proportional(n_pts, [polygon_perimeter(p) for p in loops])
    for poly, k in zip(loops, share):
        if k == 0:
            continue
        pts = uniform_perimeter_points(poly, k)
        for lam in pts:
            psi_q = tangent_angle(lam, poly)
            for psi in entry_headings(psi_q, n_psi):
                for gamma in np.atleast_1d(pitches):
                    out.append(Configuration(float(lam[0]), float(lam[1]), z,
                                             float(psi), float(gamma)))
    return out


def optimized_altitude(volumes: list[TriMesh], n_slice: int) -> float:
    """Shared altitude maximizing the total cross-section area.

    Candidate altitudes span the volumes' combined z range, with the
    endpoints offset slightly into the bodies.  Only altitudes where every
    volume has a nonempty cross-section qualify.

    Raises
    ------
    InfeasibleError
        If no candidate altitude intersects all volumes (the constant
        altitude pipeline cannot serve this scene).
    """
    if n_slice < 2:
        raise ValueError("need n_slice >= 2")
    if not volumes:
        raise ValueError("no volumes given")
    z_lo = min(v.z_extent()[0] for v in volumes)
    z_hi = max(v.z_extent()[1] for v in volumes)
    eps = EDGE_OFFSET * (z_hi - z_lo)
    zs = np.linspace(z_lo + eps, z_hi - eps, n_slice)
    best_z, best_area = None, -math.inf
    for z in zs:
        slices = [_slice_loops(v, float(z)) for v in volumes]
        if any(len(s) == 0 for s in slices):
            continue
        area = sum(polygon_area(p) for s in slices for p in s)
        if area > best_area:
            best_area, best_z = area, float(z)
    if best_z is None:
        raise InfeasibleError(
            "no altitude is common to all visibility volumes; "
            "the constant-altitude pipeline is infeasible (common-altitude)")
    return best_z


def sample_overhead(targets, z_star: float, n_psi: int) -> ClusterSamples:
    """One position per target, directly overhead at the shared altitude."""
    clusters = []
    for t in targets:
        p = t.p
        cluster = [Configuration(float(p[0]), float(p[1]), z_star, float(psi), 0.0)
                   for psi in uniform_headings(n_psi)]
        clusters.append(cluster)
    return ClusterSamples(clusters)


def sample_entry_pose(volume: TriMesh, z_star: float, n_pts: int,
                      n_psi: int) -> list[Configuration]:
    """Boundary points of the cross-section at the shared altitude, with
    tangent-to-inward headings and level pitch."""
    loops = _slice_loops(volume, z_star)
    if not loops:
        raise InfeasibleError(f"volume has no cross-section at altitude {z_star}")
    return _loop_boundary_configs(loops, n_pts, z_star, n_psi, [0.0])


def sample_entry_pose_all(volumes: list[TriMesh], z_star: float,
                          n_pts: int, n_psi: int) -> ClusterSamples:
    return ClusterSamples([sample_entry_pose(v, z_star, n_pts, n_psi) for v in volumes])


def sample_random_face(volumes: list[TriMesh], params: SamplingParams) -> ClusterSamples:
    """Surface-uniform positions via area-weighted face draws.

    Faces are selected with probability proportional to their area, then a
    point is warped onto each face through the square-root barycentric map,
    giving a uniform distribution over the whole mesh surface.
    """
    clusters = []
    pitches = pitch_values(params)
    headings = uniform_headings(params.n_psi)
    for vi, volume in enumerate(volumes):
        rng = np.random.default_rng((params.seed, vi))
        areas = mesh_face_areas(volume)
        total = areas.sum()
        if total <= 0:
            raise ValueError("mesh has zero surface area")
        weights = areas / total
        chosen = rng.choice(len(areas), size=params.n_pts, p=weights)
        r0 = rng.uniform(size=params.n_pts)
        r1 = rng.uniform(size=params.n_pts)
        c0, c1, c2 = volume.corners()
        sq = np.sqrt(r0)[:, None]
        pts = (c0[chosen] * (1.0 - sq)
               + c1[chosen] * (sq * (1.0 - r1[:, None]))
               + c2[chosen] * (sq * r1[:, None]))
        cluster = [
            Configuration(float(s[0]), float(s[1]), float(s[2]), float(psi), float(g))
            for s in pts for psi in headings for g in pitches
        ]
        clusters.append(cluster)
    return ClusterSamples(clusters)


def sample_edge_3d(volumes: list[TriMesh], params: SamplingParams) -> ClusterSamples:
    """Boundary points of each volume's lowest cross-section."""
    clusters = []
    pitches = pitch_values(params)
    for volume in volumes:
        z_lo, z_hi = volume.z_extent()
        loops = _slice_loops(volume, z_lo)  # plane through the bottom vertex
        if not loops:
            loops = _slice_loops(volume, z_lo + EDGE_OFFSET * (z_hi - z_lo))
        if not loops:
            raise InfeasibleError("volume has no cross-section near its base")
        z = z_lo + EDGE_OFFSET * (z_hi - z_lo)
        clusters.append(_loop_boundary_configs(loops, params.n_pts, z,
                                               params.n_psi, pitches))
    return ClusterSamples(clusters)


def sample_global_weighted_face(volumes: list[TriMesh],
                                params: SamplingParams) -> ClusterSamples:
    """Boundary points over a shared altitude grid, weighted by the total
    cross-section perimeter at each altitude.

    Every volume receives exactly n_pts positions, spread over the grid
    altitudes that intersect it in proportion to the global perimeter
    profile (linearly interpolated off-grid).  Volumes that fall entirely
    between grid altitudes are sampled at their own top and bottom instead.
    """
    if not volumes:
        raise ValueError("no volumes given")
    z_lo = min(v.z_extent()[0] for v in volumes)
    z_hi = max(v.z_extent()[1] for v in volumes)
    eps = EDGE_OFFSET * (z_hi - z_lo)
    zs = np.linspace(z_lo, z_hi, params.n_slice)
    zs_eff = zs.copy()
    zs_eff[0] = z_lo + eps
    zs_eff[-1] = z_hi - eps

    slices: dict[tuple[int, int], list[Polygon2]] = {}
    mu = np.zeros(params.n_slice)
    for k, z in enumerate(zs_eff):
        for vi, volume in enumerate(volumes):
            loops = _slice_loops(volume, float(z))
            slices[(vi, k)] = loops
            mu[k] += sum(polygon_perimeter(p) for p in loops)

    pitches = pitch_values(params)
    clusters = []
    for vi, volume in enumerate(volumes):
        ks = [k for k in range(params.n_slice) if slices[(vi, k)]]
        if ks:
            alt = [float(zs_eff[k]) for k in ks]
            weights = [mu[k] for k in ks]
            loops_per = [slices[(vi, k)] for k in ks]
        else:
            # volume sits between grid altitudes: use its own top and bottom
            v_lo, v_hi = volume.z_extent()
            v_eps = EDGE_OFFSET * max(v_hi - v_lo, 1e-9)
            alt = [v_lo + v_eps, v_hi - v_eps]
            weights = list(np.interp(alt, zs_eff, mu))
            loops_per = [_slice_loops(volume, z) for z in alt]
            if any(not lp for lp in loops_per):
                raise InfeasibleError("volume has no usable cross-section")
        alloc = allocate_proportional(params.n_pts, weights,
                                      min_one=params.n_pts >= len(alt))
        cluster: list[Configuration] = []
        for z, n_r, loops in zip(alt, alloc, loops_per):
            if n_r == 0:
                continue
            cluster.extend(_loop_boundary_configs(loops, n_r, z,
                                                  params.n_psi, pitches))
        clusters.append(cluster)
    return ClusterSamples(clusters)
