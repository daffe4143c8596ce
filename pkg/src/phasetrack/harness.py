"""Experiment orchestration: scenario configs, sweeps, deterministic
parallel Monte Carlo, and TSV emission.

Determinism contract: (config, seed) fully determines every emitted
number. Frames are the parallelism unit; per-frame RNG streams are keyed
by (seed, frame index, substream) and the reduction order is fixed, so
results are independent of the thread count.
"""

from __future__ import annotations

import concurrent.futures
import configparser
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from . import framing, lmmse, rates, spa
from .channel import (
    CALIBRATION_FRAME_OFFSET,
    STREAM_MESSAGE,
    STREAM_NOISE_W,
    STREAM_THETA,
    NoiseParams,
    PnParams,
    apply_pn_channel,
    make_channel,
    sample_wiener_phase,
    substream,
)

SCALES = {
    "desk": {"frames": 16, "n": 4096},
    "paper": {"frames": 256, "n": 8192},
}

COMPENSATORS = ("spa", "lmmse25", "lmmse_full", "none", "sdd_bound", "coherent")
SWEEP_KINDS = ("psr_db", "nu_delta", "nu_delta_opt_psr")

# Runs abort when more than this fraction of frames fails numerically.
MAX_SKIP_FRACTION = 1e-3


class ConfigError(ValueError):
    """Invalid configuration; message carries the offending field path."""


class NumericalFailure(RuntimeError):
    """Too many frames were skipped for a trustworthy estimate."""


@dataclass
class ScenarioConfig:
    snr_db: float = 13.0
    nu_delta: float = 5e-3
    channel: str = "identity"
    pilot: str = "superposed"
    constellation: str = "cscg"
    compensator: str = "spa"
    n: int = 4096
    frames: int = 16
    seed: int = 1
    sweep_kind: str = "psr_db"
    sweep_grid: tuple = tuple(np.arange(-20.0, 0.5, 1.0))
    psr_db: float = -5.0  # fixed PSR for nu_delta sweeps
    psr_opt_grid_db: tuple = tuple(np.arange(-20.0, 0.5, 2.0))
    lmmse_taps: int = 25
    sdd_bins: int = 256
    cal_frames: int = 8
    label: str = ""

    @property
    def nu_w(self):
        return 10.0 ** (-self.snr_db / 10.0)

    def validate(self):
        if self.n < 2:
            raise ConfigError("scenario.n: must be >= 2")
        if self.frames < 1:
            raise ConfigError("scenario.frames: must be >= 1")
        if self.nu_delta < 0 or not np.isfinite(self.nu_delta):
            raise ConfigError("scenario.nu_delta: must be finite and >= 0")
        if self.compensator not in COMPENSATORS:
            raise ConfigError(f"scenario.compensator: unknown '{self.compensator}'")
        if self.sweep_kind not in SWEEP_KINDS:
            raise ConfigError(f"sweep.kind: unknown '{self.sweep_kind}'")
        if len(self.sweep_grid) == 0:
            raise ConfigError("sweep.grid: must be non-empty")
        if list(self.sweep_grid) != sorted(self.sweep_grid):
            raise ConfigError("sweep.grid: must be sorted")
        if self.pilot not in ("superposed", "interleaved", "tone_zero"):
            raise ConfigError(f"scenario.pilot: unknown '{self.pilot}'")
        if self.constellation not in ("cscg", "qam16", "qam64"):
            raise ConfigError(f"scenario.constellation: unknown '{self.constellation}'")
        return self

    def semantic_dict(self):
        return {
            "snr_db": self.snr_db,
            "nu_delta": self.nu_delta,
            "channel": self.channel,
            "pilot": self.pilot,
            "constellation": self.constellation,
            "compensator": self.compensator,
            "n": self.n,
            "frames": self.frames,
            "seed": self.seed,
            "sweep_kind": self.sweep_kind,
            "sweep_grid": [float(v) for v in self.sweep_grid],
            "psr_db": self.psr_db,
            "psr_opt_grid_db": [float(v) for v in self.psr_opt_grid_db],
            "lmmse_taps": self.lmmse_taps,
            "sdd_bins": self.sdd_bins,
            "cal_frames": self.cal_frames,
        }

    def config_hash(self):
        blob = json.dumps(self.semantic_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]


@dataclass
class SweepResult:
    rows: list  # (sweep value, bpcu, stderr)
    config: ScenarioConfig
    skipped: int = 0
    total_frames: int = 0
    clips: int = 0


def _parse_grid(text):
    text = text.strip()
    if ":" in text:
        lo, hi, count = text.split(":")
        return tuple(np.linspace(float(lo), float(hi), int(count)))
    return tuple(float(v) for v in text.split(",") if v.strip())


def scenario_from_sections(sections, base=None):
    """Build a ScenarioConfig from flat key=value sections."""
    cfg = base if base is not None else ScenarioConfig()
    scen = dict(sections.get("scenario", {}))
    sweep = dict(sections.get("sweep", {}))
    casts = {
        "snr_db": float, "nu_delta": float, "channel": str, "pilot": str,
        "constellation": str, "compensator": str, "n": int, "frames": int,
        "seed": int, "psr_db": float, "lmmse_taps": int, "sdd_bins": int,
        "cal_frames": int, "label": str,
    }
    updates = {}
    for key, value in scen.items():
        if key not in casts:
            raise ConfigError(f"scenario.{key}: unknown field")
        try:
            updates[key] = casts[key](value)
        except ValueError as exc:
            raise ConfigError(f"scenario.{key}: {exc}") from exc
    if "kind" in sweep:
        updates["sweep_kind"] = sweep.pop("kind")
    if "grid" in sweep:
        updates["sweep_grid"] = _parse_grid(sweep.pop("grid"))
    if "psr_opt_grid" in sweep:
        updates["psr_opt_grid_db"] = _parse_grid(sweep.pop("psr_opt_grid"))
    if sweep:
        raise ConfigError(f"sweep.{next(iter(sweep))}: unknown field")
    return replace(cfg, **updates).validate()


def load_config(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)
    return scenario_from_sections({name: parser[name] for name in parser.sections()})


# ---------------------------------------------------------------------------
# Frame pipeline


@dataclass
class _Point:
    """Resolved parameters of one sweep grid point."""

    cfg: ScenarioConfig
    psr: float
    nu_delta: float
    channel: object
    scheme: framing.PilotScheme
    constellation: framing.Constellation
    metric_gain: complex = 1.0
    metric_var: float | None = None  # None = analytic per-frame (SPA only)
    lmmse_spec: object = None


def _simulate_frame(point, frame_index):
    cfg = point.cfg
    msg_rng = substream(cfg.seed, frame_index, STREAM_MESSAGE)
    theta_rng = substream(cfg.seed, frame_index, STREAM_THETA)
    noise_rng = substream(cfg.seed, frame_index, STREAM_NOISE_W)
    frame = framing.build_frame(
        point.scheme, point.constellation, point.channel, cfg.n, 1.0, msg_rng,
        noise_var_for_wf=cfg.nu_w,
    )
    theta = sample_wiener_phase(cfg.n, PnParams(point.nu_delta), theta_rng)
    z = frame.s + frame.t
    y = apply_pn_channel(z, theta, NoiseParams(0.0, cfg.nu_w), noise_rng)
    return frame, z, y


def _compensate(point, frame, z, y):
    """Returns (y_prime, analytic nu_w_prime or None)."""
    cfg = point.cfg
    if cfg.compensator == "spa":
        inputs = spa.SpaInputs(y, frame.s, frame.nu_t, cfg.nu_w, point.nu_delta)
        out = spa.run_spa(inputs)
        return out.y_prime, out.nu_w_prime
    if cfg.compensator in ("lmmse25", "lmmse_full"):
        out = lmmse.run_lmmse(y, frame.s, point.lmmse_spec)
        return out.y_prime, None
    if cfg.compensator == "none":
        return y, None
    raise ConfigError(f"scenario.compensator: '{cfg.compensator}' has no frame path")


def _eval_frame(point, frame_index):
    cfg = point.cfg
    frame, z, y = _simulate_frame(point, frame_index)
    if frame.nu_t <= 0:
        # All-pilot frame: no message power, zero rate by definition.
        return 0.0, 0
    if cfg.compensator == "sdd_bound":
        inputs = spa.SpaInputs(y, frame.s, frame.nu_t, cfg.nu_w, point.nu_delta)
        return rates.sdd_mi_frame(inputs, z, cfg.sdd_bins), 0
    y_prime, nu_w_prime = _compensate(point, frame, z, y)
    if point.metric_var is not None:
        metric = rates.SddMetricParams(
            rates.metric_scale_vector(point.channel, cfg.n, point.metric_gain),
            point.metric_var,
        )
    else:
        metric = rates.SddMetricParams(
            rates.metric_scale_vector(point.channel, cfg.n, 1.0),
            max(nu_w_prime, 1e-300),
        )
    y2 = rates.equalize(y_prime, point.channel)
    return rates.gmi_frame(y2, frame, metric, point.constellation)


def _needs_calibration(point):
    cfg = point.cfg
    if cfg.compensator in ("lmmse25", "lmmse_full", "none"):
        return True
    if cfg.compensator == "spa":
        # Eq.-based variance assumes independent residuals; the circulant
        # channel correlates them, so calibrate there.
        return cfg.channel.startswith("ofdm")
    return False


def _calibrate_point(point):
    cfg = point.cfg
    zs, yps = [], []
    for j in range(cfg.cal_frames):
        frame, z, y = _simulate_frame(point, CALIBRATION_FRAME_OFFSET + j)
        if frame.nu_t <= 0:
            # All-pilot point: rates are zero by definition and the metric
            # is never consulted, so any valid placeholder works.
            return 1.0 + 0.0j, 1.0
        y_prime, _ = _compensate(point, frame, z, y)
        zs.append(z)
        yps.append(y_prime)
    gain, var = rates.calibrate_metric(zs, yps)
    return gain, max(var, 1e-300)


def _make_point(cfg, psr, nu_delta):
    channel = make_channel(cfg.channel)
    scheme = framing.PilotScheme(cfg.pilot, psr)
    constellation = framing.Constellation.make(cfg.constellation)
    point = _Point(cfg=cfg, psr=psr, nu_delta=nu_delta, channel=channel,
                   scheme=scheme, constellation=constellation)
    if cfg.compensator in ("lmmse25", "lmmse_full"):
        pilot_frame = framing.build_frame(
            scheme, constellation, channel, cfg.n, 1.0,
            np.random.default_rng(0), noise_var_for_wf=cfg.nu_w,
        )
        point.lmmse_spec = lmmse.LmmseFilterSpec(
            np.abs(pilot_frame.s), pilot_frame.nu_t, cfg.nu_w, nu_delta,
            taps=cfg.lmmse_taps if cfg.compensator == "lmmse25" else None,
        )
    if _needs_calibration(point):
        point.metric_gain, point.metric_var = _calibrate_point(point)
    return point


def _coherent_point_rate(cfg, psr, nu_delta):
    channel = make_channel(cfg.channel)
    nu_m = 1.0 - psr
    if cfg.channel.startswith("ofdm"):
        frame = framing.build_frame(
            framing.PilotScheme("tone_zero", psr), framing.Constellation.make("cscg"),
            channel, cfg.n, 1.0, np.random.default_rng(0), noise_var_for_wf=cfg.nu_w,
        )
        cap = rates.coherent_capacity(channel, cfg.n, nu_m, cfg.nu_w,
                                      allocation=frame.allocation,
                                      msg_mask=frame.msg_mask)
    else:
        cap = rates.coherent_capacity(channel, cfg.n, nu_m, cfg.nu_w)
    return rates.RateEstimate(bpcu=cap, stderr=0.0, trials=0)


def evaluate_point(cfg, psr, nu_delta, threads=1):
    """Monte-Carlo rate estimate at one grid point."""
    if cfg.compensator == "coherent":
        return _coherent_point_rate(cfg, psr, nu_delta), 0, 0
    point = _make_point(cfg, psr, nu_delta)
    indices = list(range(cfg.frames))
    results = [None] * len(indices)

    def work(i):
        try:
            return _eval_frame(point, indices[i])
        except (FloatingPointError, np.linalg.LinAlgError) as exc:
            return exc

    if threads > 1:
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, range(len(indices))))
    else:
        results = [work(i) for i in range(len(indices))]

    samples, clips, skipped = [], 0, 0
    for res in results:
        if isinstance(res, Exception):
            skipped += 1
        else:
            bpcu, nclip = res
            samples.append(bpcu)
            clips += nclip
    if not samples:
        raise NumericalFailure("all frames failed")
    return rates.rate_from_samples(samples), skipped, clips


def _optimize_psr(cfg, nu_delta, threads):
    """PSR maximizing the SPA rate; used by the nu_delta_opt_psr sweep."""
    spa_cfg = replace(cfg, compensator="spa")
    best_psr, best_rate = None, -np.inf
    for psr_db in cfg.psr_opt_grid_db:
        est, _, _ = evaluate_point(spa_cfg, 10.0 ** (psr_db / 10.0), nu_delta, threads)
        if est.bpcu > best_rate:
            best_rate, best_psr = est.bpcu, 10.0 ** (psr_db / 10.0)
    return best_psr


def run_sweep(cfg, threads=1, progress=None):
    """One rate-vs-grid sweep. Grid points run sequentially; frames within
    a point run in parallel."""
    cfg.validate()
    rows = []
    skipped = total = clips = 0
    for gi, value in enumerate(cfg.sweep_grid):
        if cfg.sweep_kind == "psr_db":
            psr, nu_delta = 10.0 ** (value / 10.0), cfg.nu_delta
        elif cfg.sweep_kind == "nu_delta":
            psr, nu_delta = 10.0 ** (cfg.psr_db / 10.0), value
        else:  # nu_delta_opt_psr
            nu_delta = value
            psr = _optimize_psr(cfg, nu_delta, threads)
        est, nskip, nclip = evaluate_point(cfg, psr, nu_delta, threads)
        skipped += nskip
        clips += nclip
        total += cfg.frames
        rows.append((float(value), est.bpcu, est.stderr))
        if progress is not None:
            progress(f"[{cfg.label or cfg.compensator}] {gi + 1}/{len(cfg.sweep_grid)} "
                     f"x={value:g} rate={est.bpcu:.4f} +- {est.stderr:.4f}")
    if cfg.compensator != "coherent" and total and skipped / total > MAX_SKIP_FRACTION:
        raise NumericalFailure(f"{skipped}/{total} frames skipped")
    return SweepResult(rows=rows, config=cfg, skipped=skipped, total_frames=total, clips=clips)


def emit_tsv(result, path):
    """Header comments then 'x<TAB>bpcu<TAB>stderr' rows, 6 significant digits."""
    cfg = result.config
    lines = [
        "# phasetrack sweep",
        f"# config_hash: {cfg.config_hash()}",
        f"# seed: {cfg.seed}",
        f"# scenario: snr_db={cfg.snr_db:g} nu_delta={cfg.nu_delta:g} channel={cfg.channel} "
        f"pilot={cfg.pilot} constellation={cfg.constellation} compensator={cfg.compensator}",
        f"# frames: {cfg.frames} n: {cfg.n} skipped: {result.skipped} clips: {result.clips}",
    ]
    for x, bpcu, stderr in result.rows:
        lines.append(f"{x:.6g}\t{bpcu:.6g}\t{stderr:.6g}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def tsv_data_section(path):
    """Data rows only (used by determinism checks)."""
    with open(path, encoding="utf-8") as fh:
        return "".join(line for line in fh if not line.startswith("#"))


# ---------------------------------------------------------------------------
# Figure configs


def load_figure_config(path, scale=None, overrides=None):
    """A figure config is one [figure] section, optional [defaults], and
    one or more [curve:NAME] sections; each curve is a full sweep."""
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser()
    parser.read(path)
    if "figure" not in parser:
        raise ConfigError(f"{path}: missing [figure] section")
    name = parser["figure"].get("name")
    if not name:
        raise ConfigError(f"{path}: figure.name missing")
    defaults = dict(parser["defaults"]) if "defaults" in parser else {}
    curves = []
    for section in parser.sections():
        if not section.startswith("curve:"):
            continue
        merged = dict(defaults)
        merged.update(parser[section])
        sweep_keys = {k: merged.pop(k) for k in ("kind", "grid", "psr_opt_grid") if k in merged}
        cfg = scenario_from_sections({"scenario": merged, "sweep": sweep_keys})
        cfg = replace(cfg, label=section.split(":", 1)[1])
        if scale is not None:
            cfg = replace(cfg, frames=SCALES[scale]["frames"], n=SCALES[scale]["n"])
        if overrides:
            cfg = replace(cfg, **overrides)
        curves.append(cfg.validate())
    if not curves:
        raise ConfigError(f"{path}: no [curve:*] sections")
    return name, curves


def run_figure_config(path, out_dir, scale="desk", threads=1, overrides=None, progress=None):
    name, curves = load_figure_config(path, scale=scale, overrides=overrides)
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for cfg in curves:
        result = run_sweep(cfg, threads=threads, progress=progress)
        out = os.path.join(out_dir, f"{name}_{cfg.label}.tsv")
        emit_tsv(result, out)
        paths.append(out)
    return paths
