"""Seeded Monte Carlo codeword-error-rate estimation.

Randomness is organized in fixed-size batches of trials; batch k of SNR
point j draws from a Philox stream keyed by (seed, j, k), and the stopping
rule is evaluated on cumulative batch results in batch order.  Results are
therefore bit-reproducible for any worker count: workers only change how
many batches are computed concurrently, never which trials exist.

Every trial draws a fresh channel (one per two-use block for the stacked
scheme), a uniform codeword and fresh noise at the scheme's own average
energy per channel use.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analysis import snr_gain_db
from .codebooks import Codebook, TwoUseCodebook, build_codebook
from .kernels import build_tables, decode_batch, decode_two_use_batch

_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    scheme: str
    m: int
    n_r: int
    snr_db: tuple[float, ...]
    max_trials: int = 1_000_000
    target_errors: int = 100
    seed: int = 0
    decoder: str = "sphere"
    batch_size: int = 4096
    workers: int = 1

    def __post_init__(self):
        if self.max_trials < 1 or self.target_errors < 1 or not self.snr_db:
            raise ValueError("invalid simulation config")
        if self.decoder not in ("exhaustive", "sphere"):
            raise ValueError("decoder must be 'exhaustive' or 'sphere'")
        if self.batch_size < 1 or self.workers < 1:
            raise ValueError("invalid batch/worker configuration")


@dataclass(frozen=True)
class CerPoint:
    snr_db: float
    trials: int
    errors: int
    cer: float
    mean_nodes: float
    ci95_half_width: float

    @property
    def low_confidence(self) -> bool:
        return self.errors == 0


def wilson_half_width(errors: int, trials: int) -> float:
    """Half-width of the 95% Wilson score interval for errors/trials."""
    if trials == 0:
        return 0.0
    z2 = _Z95 * _Z95
    p = errors / trials
    denom = 1.0 + z2 / trials
    return (_Z95 * math.sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials))) / denom


def _batch_rng(seed: int, snr_index: int, batch_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(snr_index, batch_index))
    return np.random.Generator(np.random.Philox(ss))


def _run_batch_single(cb, tables, words, cfg, n0, snr_index, batch_index, size):
    rng = _batch_rng(cfg.seed, snr_index, batch_index)
    h2 = rng.standard_normal((size, cfg.n_r, cb.n_t, 2))
    n2 = rng.standard_normal((size, cfg.n_r, 1, 2))
    idx = rng.integers(0, cb.n_words, size=size, dtype=np.int64)
    h = (h2[..., 0] + 1j * h2[..., 1]) / np.sqrt(2.0)
    noise = (n2[..., 0, 0] + 1j * n2[..., 0, 1]) * np.sqrt(n0 / 2.0)
    x = words[idx]
    y = np.einsum("brt,bt->br", h, x) + noise
    got, _, counts = decode_batch(tables, y, h, cfg.decoder)
    return int((got != idx).sum()), int(counts.sum())


def _run_batch_two_use(cb, cfg, n0, snr_index, batch_index, size):
    rng = _batch_rng(cfg.seed, snr_index, batch_index)
    h2 = rng.standard_normal((size, cfg.n_r, cb.n_t, 2))
    n2 = rng.standard_normal((size, cfg.n_r, 2, 2))
    idx = rng.integers(0, cb.n_words, size=size, dtype=np.int64)
    h = (h2[..., 0] + 1j * h2[..., 1]) / np.sqrt(2.0)
    noise = (n2[..., 0] + 1j * n2[..., 1]) * np.sqrt(n0 / 2.0)

    shift = cb.ps.b + cb.tf.b
    order = idx >> shift
    ps_i = (idx >> cb.tf.b) & ((1 << cb.ps.b) - 1)
    tf_i = idx & ((1 << cb.tf.b) - 1)
    ps_w = cb.ps.words_complex()[ps_i]
    tf_w = cb.tf.words_complex()[tf_i]
    sel = (order == 1)[:, None]
    x1 = np.where(sel, tf_w, ps_w)
    x2 = np.where(sel, ps_w, tf_w)
    y = np.empty((size, cfg.n_r, 2), dtype=np.complex128)
    y[:, :, 0] = np.einsum("brt,bt->br", h, x1) + noise[:, :, 0]
    y[:, :, 1] = np.einsum("brt,bt->br", h, x2) + noise[:, :, 1]
    got, _, counts = decode_two_use_batch(cb, y, h, cfg.decoder)
    return int((got != idx).sum()), int(counts.sum())


def run_cer(cfg: SimConfig, codebook: Codebook | None = None) -> list[CerPoint]:
    """Estimate the CER per SNR point under the configured stopping rule."""
    cb = codebook if codebook is not None else build_codebook(cfg.scheme, cfg.m)
    es = float(cb.avg_energy_per_use())
    two_use = isinstance(cb, TwoUseCodebook)
    if two_use:
        build_tables(cb.ps)
        build_tables(cb.tf)
        tables = words = None
    else:
        tables = build_tables(cb)
        words = cb.words_complex()

    n_batches = math.ceil(cfg.max_trials / cfg.batch_size)
    sizes = [
        min(cfg.batch_size, cfg.max_trials - k * cfg.batch_size) for k in range(n_batches)
    ]

    points = []
    for j, snr in enumerate(cfg.snr_db):
        n0 = es / 10.0 ** (snr / 10.0)

        def job(k: int):
            if two_use:
                return _run_batch_two_use(cb, cfg, n0, j, k, sizes[k])
            return _run_batch_single(cb, tables, words, cfg, n0, j, k, sizes[k])

        trials = errors = nodes = 0
        done = False
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            k = 0
            while k < n_batches and not done:
                wave = list(range(k, min(k + cfg.workers, n_batches)))
                for bk, (e, nd) in zip(wave, pool.map(job, wave)):
                    trials += sizes[bk]
                    errors += e
                    nodes += nd
                    if errors >= cfg.target_errors:
                        done = True
                        break
                k = wave[-1] + 1
        points.append(
            CerPoint(
                snr_db=float(snr),
                trials=trials,
                errors=errors,
                cer=errors / trials,
                mean_nodes=nodes / trials,
                ci95_half_width=wilson_half_width(errors, trials),
            )
        )
    return points


def snr_at_cer(points: list[CerPoint], target_cer: float) -> float:
    """SNR where the measured curve crosses target_cer (log-linear interpolation)."""
    pts = sorted(points, key=lambda p: p.snr_db)
    for a, b in zip(pts, pts[1:]):
        if a.cer >= target_cer >= b.cer and a.cer > 0 and b.cer > 0 and a.cer != b.cer:
            la, lb, lt = math.log10(a.cer), math.log10(b.cer), math.log10(target_cer)
            return a.snr_db + (b.snr_db - a.snr_db) * (lt - la) / (lb - la)
    raise ValueError(f"target CER {target_cer} is not bracketed by the measured curve")


def gain_at_cer(
    curves: dict[str, list[CerPoint]],
    target_cer: float,
    n_c: dict[str, int] | None = None,
) -> dict[str, float]:
    """SNR offsets versus the baseline at the target CER, in dB.

    Schemes are compared at equal per-channel-use error rate: a curve
    measured per N_c-use codeword is read at the codeword error rate
    1 - (1 - target)^N_c.  By default the stacked scheme ("esm3") has
    N_c = 2 and all others 1.
    """
    if "msm" not in curves:
        raise ValueError("curves must include the msm baseline")

    def target_for(scheme: str) -> float:
        uses = (n_c or {}).get(scheme, 2 if scheme == "esm3" else 1)
        return 1.0 - (1.0 - target_cer) ** uses

    ref = snr_at_cer(curves["msm"], target_for("msm"))
    return {
        scheme: ref - snr_at_cer(points, target_for(scheme))
        for scheme, points in curves.items()
        if scheme != "msm"
    }


@dataclass(frozen=True)
class NrGainPoint:
    n_r: int
    gain_db: float
    fraction_of_asymptote: float


def gain_vs_nr(
    scheme: str,
    m: int,
    n_r_list: list[int],
    target_cer: float,
    snr_grids: dict[int, tuple[float, ...]],
    *,
    seed: int = 0,
    max_trials: int = 1_000_000,
    target_errors: int = 100,
    decoder: str = "sphere",
    workers: int = 1,
) -> list[NrGainPoint]:
    """Measured gain over the baseline per receive-antenna count.

    The asymptote is the transmit-energy ratio of the two schemes; the
    returned fraction is measured gain / asymptotic gain.
    """
    cb = build_codebook(scheme, m)
    base = build_codebook("msm", m)
    asymptote = snr_gain_db(base.avg_energy_per_use(), cb.avg_energy_per_use())
    out = []
    for n_r in n_r_list:
        grid = tuple(snr_grids[n_r])
        common = dict(
            m=m,
            n_r=n_r,
            snr_db=grid,
            max_trials=max_trials,
            target_errors=target_errors,
            seed=seed,
            decoder=decoder,
            workers=workers,
        )
        curves = {
            "msm": run_cer(SimConfig(scheme="msm", **common), codebook=base),
            scheme: run_cer(SimConfig(scheme=scheme, **common), codebook=cb),
        }
        gain = gain_at_cer(curves, target_cer)[scheme]
        out.append(NrGainPoint(n_r, gain, gain / asymptote))
    return out
