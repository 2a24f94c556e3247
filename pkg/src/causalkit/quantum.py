"""Numeric kits: classical mechanics stepping, 1D Schrodinger evolution,
particle/wave collection operations, and a toy cellular-automaton world.

Importing this module registers the corresponding CML intrinsics
(schrodinger_step, pw_propagate, pw_interact, pw_detect, ca_step,
gauss_packet, fill).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import solve_banded

from . import intrinsics
from .engine import as_source
from .errors import (
    MissingAttributeError,
    PositionOutOfBinsError,
    SolveError,
    ZeroNormError,
)
from .intrinsics import Intrinsic, IntrinsicTypeError
from .pw import PwCollection, PwPath
from .state import (
    TypeDesc,
    VCGrid,
    VInt,
    VList,
    VPw,
    VReal,
    VRecord,
    VVector,
)

# --- classical mechanics ------------------------------------------------------


def classical_step(particles, potential_gradient, dt: float):
    """Velocity-Verlet step for point particles in a 1D potential.

    ``particles`` is a list of (mass, position, velocity) triples;
    ``potential_gradient`` is a callable x -> dV/dx. The force is
    F = -dV/dx, standard mechanics sign.
    """
    if not (dt > 0):
        raise ValueError("dt must be positive")
    out = []
    for m, x, v in particles:
        if not (m > 0):
            raise ValueError("mass must be positive")
        a0 = -potential_gradient(x) / m
        x1 = x + v * dt + 0.5 * a0 * dt * dt
        a1 = -potential_gradient(x1) / m
        v1 = v + 0.5 * (a0 + a1) * dt
        out.append((m, x1, v1))
    return out


# --- 1D Schrodinger evolution ----------------------------------------------------


@dataclass(frozen=True)
class GridWave:
    """Wavefunction samples on a periodic 1D grid."""

    psi: np.ndarray
    dx: float
    mass: float = 1.0
    hbar: float = 1.0
    normalized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "psi", np.asarray(self.psi, dtype=np.complex128))

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dx)


def gaussian_packet(n: int, dx: float, x0: float = 0.0, sigma: float = 1.0,
                    k0: float = 0.0, mass: float = 1.0,
                    hbar: float = 1.0) -> GridWave:
    """Normalized Gaussian wave packet centered at x0 with momentum hbar*k0.

    Grid coordinates run from -(n//2)*dx, so the packet should fit well
    inside the box to avoid periodic wrap-around.
    """
    x = (np.arange(n) - n // 2) * dx
    psi = np.exp(-((x - x0) ** 2) / (4.0 * sigma ** 2) + 1j * k0 * x)
    psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * dx)
    return GridWave(psi, dx, mass, hbar, normalized=True)


def grid_coordinates(n: int, dx: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * dx


def _solve_cyclic_tridiagonal(diag, off, corner, rhs):
    """Solve A x = rhs where A is tridiagonal with constant off-diagonal
    ``off`` plus periodic corner entries ``corner`` (Sherman-Morrison)."""
    n = len(diag)
    if n < 3:
        a = np.diag(diag).astype(complex)
        for i in range(n):
            a[i, (i + 1) % n] += off
            a[i, (i - 1) % n] += corner if n == 1 else off
        try:
            return np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise SolveError(str(exc))
    gamma = -diag[0]
    dmod = diag.astype(complex).copy()
    dmod[0] -= gamma
    dmod[-1] -= corner * corner / gamma
    ab = np.zeros((3, n), dtype=complex)
    ab[0, 1:] = off
    ab[1, :] = dmod
    ab[2, :-1] = off
    u = np.zeros(n, dtype=complex)
    u[0] = gamma
    u[-1] = corner
    try:
        y = solve_banded((1, 1), ab, rhs)
        z = solve_banded((1, 1), ab, u)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise SolveError(str(exc))
    vy = y[0] + (corner / gamma) * y[-1]
    vz = z[0] + (corner / gamma) * z[-1]
    denom = 1.0 + vz
    if denom == 0:
        raise SolveError("singular cyclic system")
    return y - z * (vy / denom)


def schrodinger_step(wave: GridWave, potential, dt: float) -> GridWave:
    """One Crank-Nicolson step with periodic boundary.

    The Cayley form (1 + i dt H / 2hbar)^-1 (1 - i dt H / 2hbar) is
    unitary for Hermitian H, so the norm is conserved to solver roundoff.
    """
    v = np.asarray(potential, dtype=float)
    psi = wave.psi
    if len(v) != len(psi):
        raise ValueError("potential grid length does not match psi")
    if not (dt > 0):
        raise ValueError("dt must be positive")
    kin = wave.hbar ** 2 / (2.0 * wave.mass * wave.dx ** 2)
    hdiag = 2.0 * kin + v
    hoff = -kin
    sigma = 1j * dt / (2.0 * wave.hbar)
    rhs = (1.0 - sigma * hdiag) * psi \
        - sigma * hoff * (np.roll(psi, 1) + np.roll(psi, -1))
    diag = 1.0 + sigma * hdiag
    out = _solve_cyclic_tridiagonal(diag, sigma * hoff, sigma * hoff, rhs)
    return replace(wave, psi=out)


def discrete_hamiltonian(n: int, dx: float, potential, mass: float = 1.0,
                         hbar: float = 1.0) -> np.ndarray:
    """Dense periodic finite-difference Hamiltonian (for eigen-analysis)."""
    kin = hbar ** 2 / (2.0 * mass * dx ** 2)
    h = np.diag(2.0 * kin + np.asarray(potential, dtype=float))
    for i in range(n):
        h[i, (i + 1) % n] += -kin
        h[i, (i - 1) % n] += -kin
    return h


# --- particle/wave collections -----------------------------------------------------


def pw_propagate(pw: PwCollection, dt: float,
                 omega_attr: str | None = None) -> PwCollection:
    """Advance every particle's position by velocity * dt on each path.

    Amplitudes are unchanged unless ``omega_attr`` names a per-path
    frequency attribute (read from particle 0), in which case each
    amplitude picks up the phase exp(i * omega * dt).
    """
    names = [n for n, _ in pw.attr_decls]
    if "position" not in names or "velocity" not in names:
        raise MissingAttributeError(
            "propagation needs 'position' and 'velocity' attributes")
    paths = []
    for path in pw.paths:
        particles = tuple(
            {**p, "position": p["position"] + p["velocity"] * dt}
            for p in path.attrs)
        amp = path.amplitude
        if omega_attr is not None:
            if omega_attr not in path.attrs[0]:
                raise MissingAttributeError(f"no attribute '{omega_attr}'")
            amp = amp * np.exp(1j * path.attrs[0][omega_attr] * dt)
        paths.append(PwPath(particles, amp))
    return PwCollection(pw.attr_decls, tuple(paths), normalized=pw.normalized)


def pw_interact(pw: PwCollection, rng):
    """Realize an interaction: draw one path with Born weights and collapse.

    Returns (selected path index, collapsed one-path collection). The
    survivor keeps its phase with modulus renormalized to 1; since a path
    fixes the attributes of all particles jointly, entangled correlations
    survive the collapse.
    """
    rnd = as_source(rng)
    amps = pw.amplitudes()
    weights = np.abs(amps) ** 2
    total = weights.sum()
    if total <= 0:
        raise ZeroNormError("all path amplitudes vanish")
    idx = rnd.categorical(weights / total)
    survivor = pw.paths[idx]
    amp = survivor.amplitude / abs(survivor.amplitude)
    collapsed = PwCollection(pw.attr_decls,
                             (PwPath(survivor.attrs, amp),),
                             normalized=True)
    return idx, collapsed


def pw_detect(pw: PwCollection, bin_edges, rng, coherent: bool = True) -> int:
    """Draw the detection bin for the collection's position attribute.

    coherent: bin probability proportional to |sum of amplitudes landing
    in the bin|^2 (indistinguishable alternatives interfere). marked
    (coherent=False): proportional to the sum of |amplitude|^2 per bin
    (which-path information exists, interference is lost).
    """
    rnd = as_source(rng)
    edges = np.asarray(bin_edges, dtype=float)
    if len(edges) < 2:
        raise ValueError("need at least two bin edges")
    positions = pw.attr_array("position")
    if np.any(positions < edges[0]) or np.any(positions > edges[-1]):
        raise PositionOutOfBinsError(
            f"path positions outside [{edges[0]}, {edges[-1]}]")
    idx = np.searchsorted(edges, positions, side="right") - 1
    idx = np.minimum(idx, len(edges) - 2)
    amps = pw.amplitudes()
    nbins = len(edges) - 1
    if coherent:
        binamps = (np.bincount(idx, weights=amps.real, minlength=nbins)
                   + 1j * np.bincount(idx, weights=amps.imag, minlength=nbins))
        probs = np.abs(binamps) ** 2
    else:
        probs = np.bincount(idx, weights=np.abs(amps) ** 2, minlength=nbins)
    total = probs.sum()
    if total <= 0:
        raise ZeroNormError("all detection probabilities vanish")
    return int(rnd.categorical(probs / total))


# --- toy cellular automaton ---------------------------------------------------------


@dataclass(frozen=True)
class CaParticle:
    id: int
    pos: int
    vel: int
    species: int = 0


@dataclass(frozen=True)
class CaWorld:
    phi: np.ndarray                 # one field value per cell
    particles: tuple                # CaParticle entries
    alpha: float = 0.2              # field diffusion coefficient

    def __post_init__(self):
        object.__setattr__(self, "phi", np.asarray(self.phi, dtype=float))
        object.__setattr__(self, "particles", tuple(self.particles))

    @property
    def n_cells(self) -> int:
        return len(self.phi)

    def momentum(self) -> int:
        return sum(p.vel for p in self.particles)


def ca_step(world: CaWorld) -> CaWorld:
    """One automaton step: diffuse the field, move particles, and exchange
    velocities when two or more particles land in the same cell.

    Velocity exchange permutes velocities within a cell (reversal over the
    id-sorted occupants), so total momentum is conserved exactly.
    """
    phi = world.phi
    lap = np.roll(phi, 1) + np.roll(phi, -1) - 2.0 * phi
    phi1 = phi + world.alpha * lap
    n = world.n_cells
    moved = [replace(p, pos=(p.pos + p.vel) % n) for p in world.particles]
    by_cell: dict = {}
    for i, p in enumerate(moved):
        by_cell.setdefault(p.pos, []).append(i)
    for cell, members in by_cell.items():
        if len(members) < 2:
            continue
        members.sort(key=lambda i: moved[i].id)
        vels = [moved[i].vel for i in members]
        for i, v in zip(members, reversed(vels)):
            moved[i] = replace(moved[i], vel=v)
    return CaWorld(phi1, tuple(moved), world.alpha)


# --- value marshalling -----------------------------------------------------------


def ca_world_to_value(world: CaWorld, record: str = "CaWorld",
                      particle_record: str = "CaParticle") -> VRecord:
    particles = VList([
        VRecord(particle_record, {"id": VInt(p.id), "pos": VInt(p.pos),
                                  "vel": VInt(p.vel),
                                  "species": VInt(p.species)})
        for p in world.particles])
    return VRecord(record, {"phi": VVector(world.phi),
                            "particles": particles,
                            "alpha": VReal(world.alpha)})


def ca_world_from_value(v: VRecord) -> CaWorld:
    particles = tuple(
        CaParticle(id=p.fields["id"].value, pos=p.fields["pos"].value,
                   vel=p.fields["vel"].value,
                   species=p.fields["species"].value)
        for p in v.fields["particles"].items)
    return CaWorld(v.fields["phi"].values, particles,
                   v.fields["alpha"].value)


# --- intrinsic registration ----------------------------------------------------------


def _want(cond: bool, msg: str):
    if not cond:
        raise IntrinsicTypeError(msg)


def _is_real(td) -> bool:
    return td.kind in ("int", "real")


def _check_schrodinger(args, ctx):
    _want(len(args) == 5,
          "schrodinger_step takes (psi, V, dt, mass, hbar)")
    psi, v = args[0], args[1]
    _want(psi.kind == "cgrid", "first argument must be a cgrid")
    _want(v.kind == "vector", "potential must be a vector")
    _want(v.length == psi.length, "potential length must match psi")
    for td in args[2:]:
        _want(_is_real(td), "dt, mass, hbar must be real")
    return TypeDesc.cgrid(psi.length, psi.dx)


def _impl_schrodinger(args, env):
    psi, v, dt, mass, hbar = args
    wave = GridWave(psi.amps, psi.dx, float(mass.value), float(hbar.value))
    out = schrodinger_step(wave, v.values, float(dt.value))
    return VCGrid(out.psi, psi.dx)


def _check_pw_propagate(args, ctx):
    _want(len(args) == 2, "pw_propagate takes (pw, dt)")
    _want(args[0].kind == "pwcollection", "first argument must be a pw collection")
    names = [n for n, _ in args[0].attrs]
    _want("position" in names and "velocity" in names,
          "pw needs 'position' and 'velocity' attributes")
    _want(_is_real(args[1]), "dt must be real")
    return args[0]


def _impl_pw_propagate(args, env):
    return VPw(pw_propagate(args[0].pw, float(args[1].value)))


def _check_pw_interact(args, ctx):
    _want(len(args) == 1, "pw_interact takes (pw)")
    _want(args[0].kind == "pwcollection", "argument must be a pw collection")
    return args[0]


def _impl_pw_interact(args, env):
    _, collapsed = pw_interact(args[0].pw, env.rnd)
    return VPw(collapsed)


def _check_pw_detect(args, ctx):
    _want(len(args) == 5,
          "pw_detect takes (pw, nbins, lo, hi, coherent)")
    _want(args[0].kind == "pwcollection", "first argument must be a pw collection")
    names = [n for n, _ in args[0].attrs]
    _want("position" in names, "pw needs a 'position' attribute")
    _want(args[1].kind == "int", "nbins must be int")
    _want(_is_real(args[2]) and _is_real(args[3]), "lo and hi must be real")
    _want(args[4].kind == "bool", "coherent flag must be bool")
    return TypeDesc.int_()


def _impl_pw_detect(args, env):
    pw, nbins, lo, hi, coherent = args
    edges = np.linspace(float(lo.value), float(hi.value), nbins.value + 1)
    return VInt(pw_detect(pw.pw, edges, env.rnd, coherent=coherent.value))


def _check_ca_step(args, ctx):
    _want(len(args) == 1, "ca_step takes (world)")
    _want(args[0].kind == "record", "argument must be a world record")
    return args[0]


def _impl_ca_step(args, env):
    v = args[0]
    particle_record = "CaParticle"
    if v.fields["particles"].items:
        particle_record = v.fields["particles"].items[0].record
    world = ca_step(ca_world_from_value(v))
    return ca_world_to_value(world, record=v.record,
                             particle_record=particle_record)


def _check_gauss_packet(args, ctx):
    _want(len(args) == 5, "gauss_packet takes (n, dx, x0, sigma, k0)")
    _want(args[0].kind == "int", "n must be int")
    for td in args[1:]:
        _want(_is_real(td), "dx, x0, sigma, k0 must be real")
    n = ctx.fold(0)
    dx = ctx.fold(1)
    _want(isinstance(n, int) and n >= 1, "n must be a positive int literal")
    _want(isinstance(dx, (int, float)) and dx > 0,
          "dx must be a positive literal")
    return TypeDesc.cgrid(n, float(dx))


def _impl_gauss_packet(args, env):
    n, dx, x0, sigma, k0 = [a.value for a in args]
    wave = gaussian_packet(n, float(dx), float(x0), float(sigma), float(k0))
    return VCGrid(wave.psi, float(dx))


def _check_fill(args, ctx):
    _want(len(args) == 2, "fill takes (n, value)")
    _want(args[0].kind == "int", "n must be int")
    _want(_is_real(args[1]), "value must be real")
    n = ctx.fold(0)
    _want(isinstance(n, int) and n >= 1, "n must be a positive int literal")
    return TypeDesc.vector(n)


def _impl_fill(args, env):
    return VVector(np.full(args[0].value, float(args[1].value)))


def _register_all():
    intrinsics.register(Intrinsic("schrodinger_step", False,
                                  _check_schrodinger, _impl_schrodinger))
    intrinsics.register(Intrinsic("pw_propagate", False,
                                  _check_pw_propagate, _impl_pw_propagate))
    intrinsics.register(Intrinsic("pw_interact", True,
                                  _check_pw_interact, _impl_pw_interact))
    intrinsics.register(Intrinsic("pw_detect", True,
                                  _check_pw_detect, _impl_pw_detect))
    intrinsics.register(Intrinsic("ca_step", False,
                                  _check_ca_step, _impl_ca_step))
    intrinsics.register(Intrinsic("gauss_packet", False,
                                  _check_gauss_packet, _impl_gauss_packet))
    intrinsics.register(Intrinsic("fill", False, _check_fill, _impl_fill))


_register_all()
