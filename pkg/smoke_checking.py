"""Throwaway smoke checks for checking.py (deleted before commit)."""
import time
from fractions import Fraction

from rendezvous.adversaries import lemma23_schedule, symmetric_fsynch
from rendezvous.algorithms import (
    DEFAULT_GRID,
    alg1,
    class_l_table_at,
    one_color_midpoint,
    table_index,
)
from rendezvous.checking import (
    CertificateRejected,
    GathersProven,
    NonGathering,
    Unknown,
    bounded_explore_rigid,
    check_certificate,
    dispatch_arbitrary,
    dispatch_preset_aa,
    sweep_one_color,
    sweep_two_colors,
)
from rendezvous.model import SchedulerKind, initial_configuration
from rendezvous.scalar import HALF, ONE, ZERO, scalar

# certificate: lemma23 on alg1 from (B,B) at 8
cfg = initial_configuration(("B", "B"), (ZERO, scalar(8)))
cert = check_certificate(alg1(), cfg, lemma23_schedule().period, replay_periods=10)
print("lemma23 cert:", cert.factor, "swap:", cert.swap, "alpha:", cert.alpha)
assert cert.factor == HALF and not cert.swap

# certificate: symmetric_fsynch on one-color midpoint, SSYNCH
cfg = initial_configuration(("A", "A"), (ZERO, ONE), model=SchedulerKind.SSYNCH)
cert = check_certificate(one_color_midpoint(), cfg, symmetric_fsynch(one_color_midpoint()).period)
print("one-color cert:", cert.factor, "swap:", cert.swap)
assert cert.factor == HALF and cert.swap

# rejection: gathering candidate
cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)), model=SchedulerKind.SSYNCH)
from rendezvous.model import round_event
try:
    check_certificate(alg1(), cfg, (round_event((0,)), round_event((1,))))
    raise SystemExit("expected rejection")
except CertificateRejected as e:
    print("gathering candidate rejected:", e.reason)

# explorer: alg1 (A,A) ASYNCH -> GathersProven, < 50 states, < 1s
t0 = time.time()
v = bounded_explore_rigid(alg1(), ("A", "A"), SchedulerKind.ASYNCH, depth=200)
dt = time.time() - t0
print(f"alg1 (A,A) ASYNCH: {type(v).__name__} states={getattr(v, 'states_explored', '?')} {dt:.3f}s")
assert isinstance(v, GathersProven) and v.states_explored < 50 and dt < 1.0

# explorer: alg1 (B,B) ASYNCH -> NonGathering factor 1/2
v = bounded_explore_rigid(alg1(), ("B", "B"), SchedulerKind.ASYNCH, depth=200)
print("alg1 (B,B) ASYNCH:", type(v).__name__,
      "factor:", v.certificate.factor if isinstance(v, NonGathering) else None,
      "period len:", len(v.certificate.period) if isinstance(v, NonGathering) else None)
assert isinstance(v, NonGathering)

# explorer: one-color midpoint (A,A) SSYNCH -> NonGathering
v = bounded_explore_rigid(one_color_midpoint(), ("A", "A"), SchedulerKind.SSYNCH, depth=200)
print("one-color SSYNCH:", type(v).__name__,
      "factor:", v.certificate.factor if isinstance(v, NonGathering) else None)
assert isinstance(v, NonGathering)

# explorer: alg1 (A,A) SSYNCH and FSYNCH -> GathersProven
for model in (SchedulerKind.SSYNCH, SchedulerKind.FSYNCH):
    v = bounded_explore_rigid(alg1(), ("A", "A"), model, depth=200)
    print("alg1 (A,A)", model, "->", type(v).__name__)
    assert isinstance(v, GathersProven)

# one-color sweep: 3 tables, factors 1/2, 1, 1 in index order? grid order 0,1/2,1
rep = sweep_one_color(DEFAULT_GRID)
for r in rep.records:
    print("one-color table", r.index, r.rules, "factor", r.factor)
factors = {r.index: r.factor for r in rep.records}
# index 0: lam=0 -> 1; index 1: lam=1/2 -> 1/2; index 2: lam=1 -> 1
assert factors == {0: ONE, 1: HALF, 2: ONE}, factors

# arbitrary sweep over the full default grid
t0 = time.time()
rep = sweep_two_colors(DEFAULT_GRID, "rigid-asynch-arbitrary")
dt = time.time() - t0
print(f"arbitrary sweep: {len(rep.survivors)}/{rep.total} survive, {dt:.1f}s")
assert rep.total == 1296 and rep.survivors == []
lemmas = {}
for r in rep.records:
    lemmas[r.lemma] = lemmas.get(r.lemma, 0) + 1
print("defeats by lemma:", dict(sorted(lemmas.items())))

# preset sweep
t0 = time.time()
prep = sweep_two_colors(DEFAULT_GRID, "rigid-asynch-preset-aa")
dt = time.time() - t0
alg1_idx = table_index(alg1(), DEFAULT_GRID)
print(f"preset sweep: {len(prep.survivors)}/{prep.total} survive, {dt:.1f}s; "
      f"alg1 index {alg1_idx} in survivors: {alg1_idx in prep.survivors}")
assert alg1_idx in prep.survivors
print("survivor count:", len(prep.survivors))

# structural oracle for the survivor family
expected = set()
for i in range(1296):
    t = class_l_table_at(i, 2, DEFAULT_GRID)
    raa, rab = t.entries[("A", "A")], t.entries[("A", "B")]
    rba, rbb = t.entries[("B", "A")], t.entries[("B", "B")]
    if raa.next_color != "B" or raa.lam != HALF:
        continue
    if rbb.next_color == "A" and rbb.lam != ZERO:
        continue  # killed by lemma19
    if rba.next_color == "A":
        continue  # killed by lemma16
    if rbb.next_color == "A" and rba.lam != ZERO:
        continue  # killed by lemma17 (B(B)=(A,0) here)
    if rbb.next_color == "A" and rba.lam == ZERO and rab.next_color == "B":
        continue  # killed by lemma18 to_B
    if rba.lam == ZERO and rab.next_color == "A" and rab.lam != ONE:
        continue  # killed by lemma18 stays_A
    expected.add(i)
print("structural family size:", len(expected))
assert set(prep.survivors) == expected, (set(prep.survivors) ^ expected)

# non-rigid preset sweep
t0 = time.time()
nrep = sweep_two_colors(DEFAULT_GRID, "nonrigid-asynch-preset", delta=ONE)
dt = time.time() - t0
print(f"nonrigid preset sweep: {len(nrep.survivors)}/{nrep.total} survive, {dt:.1f}s")
assert nrep.total == 1296 and nrep.survivors == []
with_drive = sum(1 for r in nrep.records if r.drive_initial_distance is not None)
print("records with drive info:", with_drive)
assert with_drive == 1296

# smaller grid: {0, 1/2} -> 256 tables, 0 survive arbitrary
grid2 = (ZERO, HALF)
rep2 = sweep_two_colors(grid2, "rigid-asynch-arbitrary")
print(f"grid {{0,1/2}}: {len(rep2.survivors)}/{rep2.total} survive")
assert rep2.total == 256 and rep2.survivors == []

# explorer consistency spot check on 60 spread indices (full check in tests)
t0 = time.time()
bad = []
for i in range(0, 1296, 22):
    rec = rep.records[i]
    t = class_l_table_at(i, 2, DEFAULT_GRID)
    v = bounded_explore_rigid(t, rec.start_colors, SchedulerKind.ASYNCH, depth=200)
    if isinstance(v, GathersProven):
        bad.append(i)
print(f"spot consistency ({(1296 + 21)//22} tables): contradictions={bad}, {time.time()-t0:.1f}s")
assert not bad

print("ALL CHECKING SMOKE CHECKS PASSED")
