"""Throwaway smoke checks for the adversary schedules (deleted before commit)."""
from fractions import Fraction

from rendezvous.adversaries import (
    alternating_ssynch,
    drive_to_config,
    lemma16_schedule,
    lemma17_schedule,
    lemma18_schedule,
    lemma19_schedule,
    lemma23_schedule,
    lockstep_two_rounds,
    one_color_asynch,
    random_fair,
    rigid_drive_all_to_other,
    symmetric_fsynch,
)
from rendezvous.algorithms import alg1, alg2, alg3, one_color_midpoint
from rendezvous.model import (
    Rule,
    RuleTable,
    SchedulerKind,
    initial_configuration,
    non_rigid,
)
from rendezvous.scalar import HALF, ONE, ZERO, scalar
from rendezvous.semantics import (
    FairnessPolicy,
    fairness_violations,
    gathered_stable,
    run_events,
    run_policy,
    run_schedule,
)


def mk_table(aa, ab, ba, bb):
    return RuleTable(("A", "B"), {
        ("A", "A"): Rule(*aa), ("A", "B"): Rule(*ab),
        ("B", "A"): Rule(*ba), ("B", "B"): Rule(*bb),
    })


def run_periods(table, script, colors, d, periods, model=SchedulerKind.ASYNCH):
    cfg = initial_configuration(colors, (ZERO, scalar(d)), model=model)
    events = list(script.prefix) + list(script.period) * periods
    trace = run_events(cfg, table, events, budget=10_000, stop_when_settled=False)
    return trace.final


def show(tag, final, expect_dist):
    r0, r1 = final.robots
    ok = final.distance == expect_dist
    print(f"{tag}: r0=({r0.position},{r0.light}) r1=({r1.position},{r1.light}) "
          f"dist={final.distance} expect={expect_dist} {'OK' if ok else 'FAIL'}")
    assert ok, tag


# lemma16, general lam != 1: A(A)=(B,1/2), B(A)=(A,lam); factor |1-lam|/2, swap
for lam in (ZERO, scalar("1/3"), scalar(3), scalar(-2)):
    t = mk_table(("B", HALF), ("A", ONE), ("A", lam), ("A", ZERO))
    s = lemma16_schedule(lam, table=t)
    final = run_periods(t, s, ("A", "A"), 8, 1)
    factor = abs(1 - lam) / 2
    show(f"lemma16 lam={lam}", final, 8 * factor)
    # swap: end robot0 should hold the role of start robot1
    r0, r1 = final.robots
    assert (r0.light, r1.light) == ("A", "A")

# lemma16 lam = 1 variant
t = mk_table(("B", HALF), ("A", ONE), ("A", ONE), ("A", ZERO))
s = lemma16_schedule(ONE, table=t)
final = run_periods(t, s, ("A", "A"), 8, 1)
show("lemma16 lam=1", final, 4)
assert [r.light for r in final.robots] == ["A", "A"]

# lemma19: A(A)=(B,1/2), B(B)=(A,lam != 0); factor |lam|/2
for lam in (ONE, scalar("1/2"), scalar("-1/3"), scalar(2)):
    t = mk_table(("B", HALF), ("A", ONE), ("B", ZERO), ("A", lam))
    s = lemma19_schedule(lam, table=t)
    final = run_periods(t, s, ("A", "A"), 8, 1)
    show(f"lemma19 lam={lam}", final, 8 * abs(lam) / 2)
    assert [r.light for r in final.robots] == ["A", "A"]

# lemma17: A(A)=(B,1/2), B(B)=(A,0), B(A)=(B,lam != 0); factor |lam|/2
for lam in (ONE, scalar("1/2"), scalar("-1/3"), scalar(2)):
    t = mk_table(("B", HALF), ("A", ONE), ("B", lam), ("A", ZERO))
    s = lemma17_schedule(lam, table=t)
    final = run_periods(t, s, ("A", "A"), 8, 1)
    show(f"lemma17 lam={lam}", final, 8 * abs(lam) / 2)
    assert [r.light for r in final.robots] == ["A", "A"]

# lemma18 to_B_not1: A(A)=(B,1/2), B(B)=(A,0), A(B)=(B,lam != 1); factor |1-lam|/2
for lam in (ZERO, scalar("1/2"), scalar(-1), scalar(3)):
    t = mk_table(("B", HALF), ("B", lam), ("B", ZERO), ("A", ZERO))
    s = lemma18_schedule(lam, "to_B_not1", table=t)
    final = run_periods(t, s, ("A", "A"), 8, 1)
    show(f"lemma18/to_B_not1 lam={lam}", final, 8 * abs(1 - lam) / 2)
    assert [r.light for r in final.robots] == ["A", "A"]

# lemma18 to_B_1: A(B)=(B,1); factor 1/2
t = mk_table(("B", HALF), ("B", ONE), ("B", ZERO), ("A", ZERO))
s = lemma18_schedule(ONE, "to_B_1", table=t)
final = run_periods(t, s, ("A", "A"), 8, 1)
show("lemma18/to_B_1", final, 4)
assert [r.light for r in final.robots] == ["A", "A"]

# lemma18 stays_A: A(B)=(A,lam != 1), B(A)=(B,0); factor |1-lam| with prefix
for lam in (ZERO, scalar("1/2"), scalar(-1), scalar(3)):
    t = mk_table(("B", HALF), ("A", lam), ("B", ZERO), ("A", ZERO))
    s = lemma18_schedule(lam, "stays_A", table=t)
    cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)))
    pre = run_events(cfg, t, list(s.prefix), stop_when_settled=False)
    d_after_prefix = pre.final.distance
    events = list(s.period) * 1
    trace = run_events(pre.final, t, events, stop_when_settled=False)
    show(f"lemma18/stays_A lam={lam}", trace.final, d_after_prefix * abs(1 - lam))
    assert [r.light for r in trace.final.robots] == ["B", "A"]

# lemma23 against alg1 from (B,B): factor 1/2, colors stay (B,B)
s = lemma23_schedule(table=alg1())
final = run_periods(alg1(), s, ("B", "B"), 8, 1)
show("lemma23", final, 4)
assert [r.light for r in final.robots] == ["B", "B"]
final2 = run_periods(alg1(), s, ("B", "B"), 8, 3)
show("lemma23 x3", final2, 1)

# one_color_asynch
t1 = one_color_midpoint()
s = one_color_asynch(HALF, table=t1)
final = run_periods(t1, s, ("A", "A"), 8, 1)
show("one_color lam=1/2", final, 4)
t1b = RuleTable(("A",), {("A", "A"): Rule("A", ZERO)})
s = one_color_asynch(ZERO, table=t1b)
final = run_periods(t1b, s, ("A", "A"), 8, 1)
show("one_color lam=0", final, 8)
t1c = RuleTable(("A",), {("A", "A"): Rule("A", ONE)})
s = one_color_asynch(ONE, table=t1c)
final = run_periods(t1c, s, ("A", "A"), 8, 1)
show("one_color lam=1", final, 8)

# symmetric_fsynch on one-color tables under SSYNCH rounds
for lam, expect in ((HALF, 4), (ZERO, 8), (ONE, 8), (scalar("1/3"), Fraction(8, 3))):
    tt = RuleTable(("A",), {("A", "A"): Rule("A", lam)})
    s = symmetric_fsynch(tt)
    final = run_periods(tt, s, ("A", "A"), 8, 1, model=SchedulerKind.SSYNCH)
    show(f"symmetric_fsynch lam={lam}", final, expect)

# lockstep_two_rounds: neither same-color rule midpoint
t = mk_table(("B", ZERO), ("A", ONE), ("B", ZERO), ("A", scalar(2)))
s = lockstep_two_rounds(table=t)
final = run_periods(t, s, ("A", "A"), 8, 1)
show("lockstep", final, 8 * abs(1 - 2 * ZERO) * abs(1 - 2 * scalar(2)))
assert [r.light for r in final.robots] == ["A", "A"]

# drive_to_config on alg1: (A,B) target d=4 delta=1 -> initial 5
plan = drive_to_config(alg1(), ("A", "B"), scalar(4), scalar(1))
print("drive (A,B):", plan.initial_distance)
assert plan.initial_distance == 5
cfg = initial_configuration(("A", "A"), (ZERO, plan.initial_distance),
                            rigidity=non_rigid(scalar(1)))
tr = run_events(cfg, alg1(), list(plan.script.prefix) + list(plan.script.period),
                stop_when_settled=False)
r0, r1 = tr.final.robots
print("  post:", r0.position, r0.light, r1.position, r1.light, tr.final.distance)
assert (r0.light, r1.light) == ("A", "B") and tr.final.distance == 4

# drive (B,B) target d=4 delta=1 -> initial 6 (alg1 has lam_AA = 1/2)
plan = drive_to_config(alg1(), ("B", "B"), scalar(4), scalar(1))
print("drive (B,B):", plan.initial_distance)
assert plan.initial_distance == 6
cfg = initial_configuration(("A", "A"), (ZERO, plan.initial_distance),
                            rigidity=non_rigid(scalar(1)))
tr = run_events(cfg, alg1(), list(plan.script.prefix) + list(plan.script.period),
                stop_when_settled=False)
r0, r1 = tr.final.robots
print("  post:", r0.position, r0.light, r1.position, r1.light, tr.final.distance)
assert (r0.light, r1.light) == ("B", "B") and tr.final.distance == 4

# rigid drive with lam != 1/2
t = mk_table(("B", ZERO), ("A", ONE), ("B", ZERO), ("A", ZERO))
script, factor = rigid_drive_all_to_other(t)
assert factor == 1
final = run_periods(t, script, ("A", "A"), 8, 1)
show("rigid drive lam=0", final, 8)
assert [r.light for r in final.robots] == ["B", "B"]

# alternating_ssynch gathers alg1 from (A,A)
pol = alternating_ssynch(alg1())
cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)), model=SchedulerKind.SSYNCH)
tr = run_policy(cfg, alg1(), pol, budget=200)
print("alternating alg1:", tr.final.distance, tr.stop_reason, len(tr.steps))
assert gathered_stable(tr.final)

# random_fair ASYNCH drives alg1 to gathering; deterministic; fair
for seed in (0, 1, 7):
    pol = random_fair(alg1(), seed)
    cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)))
    tr = run_policy(cfg, alg1(), pol, budget=4000)
    assert gathered_stable(tr.final), (seed, tr.final)
    v = fairness_violations(tr, FairnessPolicy(8))
    assert v == [], (seed, v[:5])
    pol2 = random_fair(alg1(), seed)
    tr2 = run_policy(initial_configuration(("A", "A"), (ZERO, scalar(8))), alg1(), pol2,
                     budget=4000)
    assert [e for e, _ in tr.steps] == [e for e, _ in tr2.steps]
print("random_fair ASYNCH ok (3 seeds, deterministic, fair, gathers alg1)")

# random_fair ASYNCH non-rigid, each truncation mode, alg1 still gathers
for mode in ("always_full", "always_delta", "uniform"):
    pol = random_fair(alg1(), 3, truncation=mode)
    cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)),
                                rigidity=non_rigid(scalar("1/2")))
    tr = run_policy(cfg, alg1(), pol, budget=6000)
    assert gathered_stable(tr.final), (mode, tr.final.distance)
print("random_fair non-rigid ok (3 truncation modes)")

# random_fair SSYNCH and FSYNCH on alg1 and alg3; alg2 termination via rounds
for model in (SchedulerKind.SSYNCH, SchedulerKind.FSYNCH):
    pol = random_fair(alg1(), 11, model=model)
    cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)), model=model)
    tr = run_policy(cfg, alg1(), pol, budget=500)
    assert gathered_stable(tr.final), (model, tr.final.distance)
print("random_fair rounds ok")

pol = random_fair(alg3(), 5)
cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)), model=SchedulerKind.ASYNCH)
tr = run_policy(cfg, alg3(), pol, budget=4000)
assert gathered_stable(tr.final), tr.final
print("alg3 under random ASYNCH gathers")

pol = random_fair(alg2(), 9, model=SchedulerKind.SSYNCH)
cfg = initial_configuration(("A", "A"), (ZERO, scalar(8)), model=SchedulerKind.SSYNCH)
tr = run_policy(cfg, alg2(), pol, budget=500, stop_when_settled=False)
print("alg2 SSYNCH:", tr.final.distance,
      [type(r.phase).__name__ for r in tr.final.robots], tr.stop_reason)
assert tr.final.distance == 0
assert all(r.terminated for r in tr.final.robots)
print("alg2 terminates under random SSYNCH")

print("ALL ADVERSARY SMOKE CHECKS PASSED")
