"""Controllable-device state machines.

Capacitors switch on/off, regulators map a tap integer to a linear ratio over
[ratio_min, ratio_max], and batteries integrate state-of-charge with the
attempted discharge power projected onto what the stored energy allows.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ActionOutOfRange, TapOutOfRange

CONTINUOUS = "continuous"


@dataclass(frozen=True)
class CapacitorState:
    status: int  # 0 off, 1 on


@dataclass(frozen=True)
class RegulatorState:
    tap: int


@dataclass(frozen=True)
class BatteryState:
    soc: float
    last_p_kw: float = 0.0  # realized power, positive = discharging


@dataclass
class DeviceState:
    caps: dict[str, CapacitorState] = field(default_factory=dict)
    regs: dict[str, RegulatorState] = field(default_factory=dict)
    bats: dict[str, BatteryState] = field(default_factory=dict)

    def copy(self) -> "DeviceState":
        return DeviceState(dict(self.caps), dict(self.regs), dict(self.bats))


def initial_device_state(circuit) -> DeviceState:
    """Reset statuses: all capacitors on, full tap, full charge, no discharge."""
    return DeviceState(
        caps={cid: CapacitorState(1) for cid in circuit.capacitors},
        regs={rid: RegulatorState(spec.n_taps - 1)
              for rid, spec in circuit.regulators.items()},
        bats={bid: BatteryState(soc=1.0) for bid in circuit.batteries},
    )


def regulator_ratio(tap: int, spec) -> float:
    if not 0 <= tap < spec.n_taps:
        raise TapOutOfRange(f"tap {tap} outside [0, {spec.n_taps - 1}] for {spec.id}")
    return spec.ratio_min + tap * (spec.ratio_max - spec.ratio_min) / (spec.n_taps - 1)


def battery_target_power(action_value, mode, spec) -> float:
    """Attempted discharge power in kW for a battery action.

    ``mode`` is either the string "continuous" (action in [-1, 1]) or an
    integer N_bat_act (action in {0, ..., N-1}); discrete index k maps onto
    the normalized value -1 + 2k/(N-1).
    """
    if mode == CONTINUOUS:
        norm = float(action_value)
        if not -1.0 <= norm <= 1.0:
            raise ActionOutOfRange(f"battery action {action_value} outside [-1, 1]")
    else:
        n = int(mode)
        k = int(action_value)
        if k != action_value or not 0 <= k < n:
            raise ActionOutOfRange(f"battery action {action_value} outside {{0,...,{n - 1}}}")
        norm = -1.0 + 2.0 * k / (n - 1)
    return norm * spec.p_max_kw


def apply_battery(state: BatteryState, spec, attempted_p_kw: float,
                  dt_hours: float = 1.0) -> tuple[BatteryState, float]:
    """Project the attempted power onto soc limits and advance soc.

    Positive power discharges.  The realized power is the attempted one
    clamped so soc stays in [0, 1] and |P| <= P_max.
    """
    lo = (state.soc - 1.0) * spec.e_max_kwh / dt_hours  # max charge rate
    hi = state.soc * spec.e_max_kwh / dt_hours          # max discharge rate
    realized = min(max(attempted_p_kw, lo), hi)
    realized = min(max(realized, -spec.p_max_kw), spec.p_max_kw)
    soc = state.soc - realized * dt_hours / spec.e_max_kwh
    soc = min(max(soc, 0.0), 1.0)  # guard rounding only
    return replace(state, soc=soc, last_p_kw=realized), realized
