"""Cycle-consistent training with cross-domain conditioning and stereo chaining.

Training runs a monoscopic phase followed by a stereo phase (or, for the
baseline and mono modes, a second left-image-only phase). One trainer owns
the networks, optimizers, history buffers and the random stream that drives
sampling, augmentation and buffer swaps.
"""
import itertools
import json
import logging
import math
import time
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import torch
from torch import nn

from stereogan.exceptions import DatasetError, TrainingDivergedError
from stereogan.models.cyclegan import CycleGANModels, apply_generator, generate_stereo
from stereogan.models.discriminator import FullImageDiscriminator
from stereogan.schemas.config import ReconstructionCondition, RunConfig, TrainingMode
from stereogan.schemas.data import DatasetMode, Domain, DomainDataset, MonoSample, StereoPair
from stereogan.schemas.records import StepRecord
from stereogan.utils.augmentation import augment
from stereogan.utils.checkpoint import load_checkpoint, save_checkpoint
from stereogan.utils.datasets import sample_batch
from stereogan.utils.history_buffer import HistoryBuffer
from stereogan.utils.losses import (
    adv_loss_discriminator,
    adv_loss_generator,
    cycle_loss,
    identity_loss,
    total_generator_loss,
)
from stereogan.utils.validators import as_batch

logger = logging.getLogger(__name__)


def _set_requires_grad(nets: Sequence[nn.Module], flag: bool) -> None:
    for net in nets:
        for param in net.parameters():
            param.requires_grad_(flag)


def _sample_id(domain: Domain, sample: Union[StereoPair, MonoSample], eye: str) -> str:
    return f"{domain.value}:{sample.stem}:{eye}"


class StereoCycleTrainer:
    """Single-writer owner of the model, optimizer, buffer and random state."""

    def __init__(
        self,
        config: RunConfig,
        models: Optional[CycleGANModels] = None,
        device: Union[str, torch.device] = "cpu",
        output_dir: Optional[Path] = None,
    ):
        self.config = config
        self.cfg = config.training
        self.weights = config.losses
        self.device = torch.device(device)
        self.output_dir = Path(output_dir) if output_dir is not None else None
        self.models = (models or CycleGANModels.build(config)).to(self.device)
        self.rng = np.random.default_rng(self.cfg.seed)
        self.buffer_x = HistoryBuffer(self.cfg.buffer_capacity, self.rng)
        self.buffer_y = HistoryBuffer(self.cfg.buffer_capacity, self.rng)
        betas = (self.cfg.adam_beta1, self.cfg.adam_beta2)
        self.opt_g = torch.optim.Adam(
            itertools.chain(self.models.g.parameters(), self.models.f.parameters()),
            lr=self.cfg.lr,
            betas=betas,
        )
        self.opt_d_x = torch.optim.Adam(self.models.d_x.parameters(), lr=self.cfg.lr, betas=betas)
        self.opt_d_y = torch.optim.Adam(self.models.d_y.parameters(), lr=self.cfg.lr, betas=betas)
        self.step = 0
        self.history: List[StepRecord] = []

    # ------------------------------------------------------------------ steps

    def _prepare(self, image: torch.Tensor) -> torch.Tensor:
        return as_batch(image).to(self.device)

    def _generator_update(
        self,
        adv: Dict[str, torch.Tensor],
        cycle: Dict[str, torch.Tensor],
        extra: Dict[str, torch.Tensor],
    ) -> Dict[str, float]:
        total, breakdown = total_generator_loss(adv, cycle, extra)
        self._check_finite(breakdown)
        self.opt_g.zero_grad(set_to_none=True)
        total.backward()
        self.opt_g.step()
        return breakdown

    def _discriminator_update(
        self,
        discriminator: FullImageDiscriminator,
        optimizer: torch.optim.Optimizer,
        buffer: HistoryBuffer,
        reals: Sequence[torch.Tensor],
        fakes: Sequence[torch.Tensor],
        name: str,
    ) -> float:
        queried = [buffer.push_query(fake) for fake in fakes]
        real_scores = torch.cat([discriminator(r) for r in reals])
        fake_scores = torch.cat([discriminator(q) for q in queried])
        loss = adv_loss_discriminator(real_scores, fake_scores, self.weights)
        value = float(loss.detach())
        self._check_finite({name: value})
        optimizer.zero_grad(set_to_none=True)
        loss.backward()
        optimizer.step()
        return value

    def _identity_terms(
        self, x: torch.Tensor, y: torch.Tensor, x_w: torch.Tensor, y_w: torch.Tensor
    ) -> Dict[str, torch.Tensor]:
        if self.weights.lambda_identity <= 0:
            return {}
        g, f = self.models.g, self.models.f
        return {
            "identity_g": identity_loss(y, apply_generator(g, y, y_w), self.weights),
            "identity_f": identity_loss(x, apply_generator(f, x, x_w), self.weights),
        }

    def train_step_stereo(
        self,
        pair_x: StereoPair,
        pair_y: StereoPair,
        y_w: torch.Tensor,
        x_w: torch.Tensor,
        x_t: Optional[torch.Tensor] = None,
        y_t: Optional[torch.Tensor] = None,
        phase: int = 2,
        trace: Sequence[str] = (),
    ) -> StepRecord:
        """One joint G/F update and one update each of D_Y and D_X on stereo pairs."""
        start = time.perf_counter()
        m = self.models
        x_l, x_r = self._prepare(pair_x.left), self._prepare(pair_x.right)
        y_l, y_r = self._prepare(pair_y.left), self._prepare(pair_y.right)
        y_w, x_w = self._prepare(y_w), self._prepare(x_w)
        chained = self.cfg.reconstruction_condition == ReconstructionCondition.CHAINED
        x_t = x_w if x_t is None else self._prepare(x_t)
        y_t = y_w if y_t is None else self._prepare(y_t)

        _set_requires_grad([m.d_x, m.d_y], False)
        fake_y_l, fake_y_r = generate_stereo(m.g, x_l, x_r, y_w)
        rec_x_l = apply_generator(m.f, fake_y_l, x_w)
        rec_x_r = apply_generator(m.f, fake_y_r, rec_x_l if chained else x_t)
        fake_x_l, fake_x_r = generate_stereo(m.f, y_l, y_r, x_w)
        rec_y_l = apply_generator(m.g, fake_x_l, y_w)
        rec_y_r = apply_generator(m.g, fake_x_r, rec_y_l if chained else y_t)

        adv = {
            "adv_g_left": adv_loss_generator(m.d_y(fake_y_l), self.weights.adversarial),
            "adv_g_right": adv_loss_generator(m.d_y(fake_y_r), self.weights.adversarial),
            "adv_f_left": adv_loss_generator(m.d_x(fake_x_l), self.weights.adversarial),
            "adv_f_right": adv_loss_generator(m.d_x(fake_x_r), self.weights.adversarial),
        }
        cycle = {
            "cycle_x_left": cycle_loss(x_l, rec_x_l, self.weights),
            "cycle_x_right": cycle_loss(x_r, rec_x_r, self.weights),
            "cycle_y_left": cycle_loss(y_l, rec_y_l, self.weights),
            "cycle_y_right": cycle_loss(y_r, rec_y_r, self.weights),
        }
        losses = self._generator_update(adv, cycle, self._identity_terms(x_l, y_l, x_w, y_w))

        _set_requires_grad([m.d_x, m.d_y], True)
        losses["d_y"] = self._discriminator_update(
            m.d_y, self.opt_d_y, self.buffer_y, [y_l, y_r], [fake_y_l, fake_y_r], "d_y"
        )
        losses["d_x"] = self._discriminator_update(
            m.d_x, self.opt_d_x, self.buffer_x, [x_l, x_r], [fake_x_l, fake_x_r], "d_x"
        )
        return self._record("stereo", phase, losses, start, trace)

    def train_step_mono(
        self,
        x: torch.Tensor,
        y: torch.Tensor,
        y_w: Optional[torch.Tensor],
        x_w: Optional[torch.Tensor],
        phase: int = 1,
        trace: Sequence[str] = (),
    ) -> StepRecord:
        """Single-image version of the stereo step: two fakes, one per discriminator."""
        start = time.perf_counter()
        m = self.models
        x, y = self._prepare(x), self._prepare(y)
        y_w = None if y_w is None else self._prepare(y_w)
        x_w = None if x_w is None else self._prepare(x_w)

        _set_requires_grad([m.d_x, m.d_y], False)
        fake_y = apply_generator(m.g, x, y_w)
        rec_x = apply_generator(m.f, fake_y, x_w)
        fake_x = apply_generator(m.f, y, x_w)
        rec_y = apply_generator(m.g, fake_x, y_w)

        adv = {
            "adv_g": adv_loss_generator(m.d_y(fake_y), self.weights.adversarial),
            "adv_f": adv_loss_generator(m.d_x(fake_x), self.weights.adversarial),
        }
        cycle = {
            "cycle_x": cycle_loss(x, rec_x, self.weights),
            "cycle_y": cycle_loss(y, rec_y, self.weights),
        }
        losses = self._generator_update(adv, cycle, self._identity_terms(x, y, x_w, y_w))

        _set_requires_grad([m.d_x, m.d_y], True)
        losses["d_y"] = self._discriminator_update(
            m.d_y, self.opt_d_y, self.buffer_y, [y], [fake_y], "d_y"
        )
        losses["d_x"] = self._discriminator_update(
            m.d_x, self.opt_d_x, self.buffer_x, [x], [fake_x], "d_x"
        )
        return self._record("mono", phase, losses, start, trace)

    def _record(
        self, kind: str, phase: int, losses: Dict[str, float], start: float, trace: Sequence[str]
    ) -> StepRecord:
        record = StepRecord(
            step=self.step,
            phase=phase,
            kind=kind,
            losses=losses,
            seconds=time.perf_counter() - start,
            samples=list(trace),
        )
        logger.debug(f"step {self.step}: {losses}")
        return record

    def _check_finite(self, losses: Dict[str, float]) -> None:
        if all(math.isfinite(v) for v in losses.values()):
            return
        dump_path = None
        if self.output_dir is not None:
            dump_path = self.output_dir / f"diverged_step{self.step}.pt"
            save_checkpoint(self, dump_path, extra={"losses": losses})
        logger.error(f"Non-finite loss at step {self.step}: {losses} (dump: {dump_path})")
        raise TrainingDivergedError(self.step, losses, str(dump_path) if dump_path else None)

    # ------------------------------------------------------------- sampling

    @property
    def conditional(self) -> bool:
        return self.models.conditional

    def _draw(self, dataset: DomainDataset):
        return augment(sample_batch(dataset, self.rng), self.config.augment, self.rng)

    def _mono_step(
        self, ds_x: DomainDataset, ds_y: DomainDataset, phase: int, eye: str
    ) -> StepRecord:
        sx, sy = self._draw(ds_x), self._draw(ds_y)
        trace = [_sample_id(Domain.X, sx, eye), _sample_id(Domain.Y, sy, eye)]
        y_w = x_w = None
        if self.conditional:
            cy, cx = self._draw(ds_y), self._draw(ds_x)
            y_w, x_w = cy.image, cx.image
            trace += [_sample_id(Domain.Y, cy, eye), _sample_id(Domain.X, cx, eye)]
        return self.train_step_mono(sx.image, sy.image, y_w, x_w, phase=phase, trace=trace)

    def _stereo_step(self, ds_x: DomainDataset, ds_y: DomainDataset) -> StepRecord:
        px, py = self._draw(ds_x), self._draw(ds_y)
        cy, cx = self._draw(ds_y), self._draw(ds_x)
        trace = [
            *(_sample_id(Domain.X, px, eye) for eye in ("left", "right")),
            *(_sample_id(Domain.Y, py, eye) for eye in ("left", "right")),
            _sample_id(Domain.Y, cy, "left"),
            _sample_id(Domain.X, cx, "left"),
        ]
        x_t = y_t = None
        if self.cfg.reconstruction_condition == ReconstructionCondition.RANDOM:
            tx, ty = self._draw(ds_x), self._draw(ds_y)
            x_t, y_t = tx.left, ty.left
            trace += [_sample_id(Domain.X, tx, "left"), _sample_id(Domain.Y, ty, "left")]
        return self.train_step_stereo(
            px, py, cy.left, cx.left, x_t=x_t, y_t=y_t, phase=2, trace=trace
        )

    # ------------------------------------------------------------ curriculum

    def _phase_datasets(
        self,
        mono_x: Optional[DomainDataset],
        mono_y: Optional[DomainDataset],
        stereo_x: Optional[DomainDataset],
        stereo_y: Optional[DomainDataset],
    ) -> Tuple[Tuple[DomainDataset, DomainDataset], Tuple[DomainDataset, DomainDataset]]:
        for ds, domain, mode, name in (
            (mono_x, Domain.X, DatasetMode.MONO, "mono X"),
            (mono_y, Domain.Y, DatasetMode.MONO, "mono Y"),
            (stereo_x, Domain.X, DatasetMode.STEREO, "stereo X"),
            (stereo_y, Domain.Y, DatasetMode.STEREO, "stereo Y"),
        ):
            if ds is None:
                continue
            if ds.domain != domain or ds.mode != mode:
                raise DatasetError(
                    f"{name} dataset has domain {ds.domain.value} and mode {ds.mode.value}"
                )
        if (mono_x is None) != (mono_y is None):
            raise DatasetError("mono datasets must be given for both domains or neither")
        if (stereo_x is None) != (stereo_y is None):
            raise DatasetError("stereo datasets must be given for both domains or neither")
        if mono_x is None and stereo_x is None:
            raise DatasetError("no training data")
        if stereo_x is None and self.cfg.epochs_stereo > 0:
            raise DatasetError("phase 2 needs stereo datasets")

        phase1 = (mono_x, mono_y) if mono_x is not None else (
            stereo_x.left_view(),
            stereo_y.left_view(),
        )
        if stereo_x is None:
            return phase1, phase1
        if self.cfg.mode == TrainingMode.STEREO:
            return phase1, (stereo_x, stereo_y)
        return phase1, (stereo_x.left_view(), stereo_y.left_view())

    def fit(
        self,
        mono_x: Optional[DomainDataset] = None,
        mono_y: Optional[DomainDataset] = None,
        stereo_x: Optional[DomainDataset] = None,
        stereo_y: Optional[DomainDataset] = None,
        metrics_path: Optional[Path] = None,
    ) -> List[StepRecord]:
        """Run (or resume) the mono-then-stereo curriculum at a constant learning rate.

        The loop is indexed by global step, so a trainer restored from a
        checkpoint continues exactly where the saved run stood.
        """
        (p1_x, p1_y), (p2_x, p2_y) = self._phase_datasets(mono_x, mono_y, stereo_x, stereo_y)
        phase1_steps = self.cfg.epochs_mono * max(len(p1_x), len(p1_y))
        phase2_steps = self.cfg.epochs_stereo * max(len(p2_x), len(p2_y))
        total = phase1_steps + phase2_steps
        stereo_phase2 = self.cfg.mode == TrainingMode.STEREO
        phase1_eye = "mono" if mono_x is not None else "left"
        logger.info(
            f"Curriculum ({self.cfg.mode.value}): {phase1_steps} mono steps, "
            f"{phase2_steps} {'stereo' if stereo_phase2 else 'left-image'} steps, "
            f"resuming at {self.step}"
        )

        records: List[StepRecord] = []
        metrics = self._open_metrics(metrics_path)
        try:
            while self.step < total:
                phase = 1 if self.step < phase1_steps else 2
                if self.step == phase1_steps:
                    logger.info(f"Phase 2 starts at step {self.step}")
                if phase == 2 and stereo_phase2:
                    record = self._stereo_step(p2_x, p2_y)
                elif phase == 2:
                    record = self._mono_step(p2_x, p2_y, phase=2, eye="left")
                else:
                    record = self._mono_step(p1_x, p1_y, phase=1, eye=phase1_eye)
                self.step += 1
                records.append(record)
                self.history.append(record)
                if metrics is not None:
                    metrics.write(record.model_dump_json() + "\n")
                    metrics.flush()
                if self.step % self.cfg.log_every == 0:
                    logger.info(f"step {self.step}/{total} total={record.losses['total']:.4f}")
                if self.output_dir is not None and self._checkpoint_due(phase1_steps, total):
                    save_checkpoint(self, self.output_dir / f"step_{self.step:07d}.pt")
        finally:
            if metrics is not None:
                metrics.close()
        if self.output_dir is not None:
            save_checkpoint(self, self.output_dir / "final.pt")
        return records

    def _checkpoint_due(self, phase1_steps: int, total: int) -> bool:
        every = self.cfg.checkpoint_every
        if every and self.step % every == 0:
            return True
        return self.step == phase1_steps and 0 < phase1_steps < total

    def _open_metrics(self, path: Optional[Path]) -> Optional[TextIO]:
        if path is None:
            return None
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        if self.step > 0 and path.exists():
            self._truncate_metrics(path)
        fresh = not path.exists() or path.stat().st_size == 0
        handle = path.open("a", encoding="utf-8")
        if fresh:
            handle.write(json.dumps({"config": self.config.model_dump(mode="json")}) + "\n")
        return handle

    def _truncate_metrics(self, path: Path) -> None:
        """Drop records at or past the current step left by an interrupted run."""
        kept, dropped = [], 0
        for line in path.read_text(encoding="utf-8").splitlines():
            if not line.strip():
                continue
            entry = json.loads(line)
            if "config" in entry or entry.get("step", 0) < self.step:
                kept.append(line)
            else:
                dropped += 1
        if dropped:
            path.write_text("".join(f"{line}\n" for line in kept), encoding="utf-8")
            logger.info(f"Dropped {dropped} metrics records from step {self.step} on")

    # ----------------------------------------------------------------- state

    def state_dict(self) -> dict:
        return {
            "models": self.models.state_dict(),
            "mode": self.models.mode.value,
            "opt_g": self.opt_g.state_dict(),
            "opt_d_x": self.opt_d_x.state_dict(),
            "opt_d_y": self.opt_d_y.state_dict(),
            "buffer_x": self.buffer_x.state_dict(),
            "buffer_y": self.buffer_y.state_dict(),
            "rng_state": self.rng.bit_generator.state,
            "torch_rng_state": torch.get_rng_state(),
            "step": self.step,
        }

    def load_state_dict(self, state: dict) -> None:
        self.models.load_state_dict(state["models"])
        self.opt_g.load_state_dict(state["opt_g"])
        self.opt_d_x.load_state_dict(state["opt_d_x"])
        self.opt_d_y.load_state_dict(state["opt_d_y"])
        self.buffer_x.load_state_dict(state["buffer_x"])
        self.buffer_y.load_state_dict(state["buffer_y"])
        self.rng.bit_generator.state = state["rng_state"]
        torch.set_rng_state(state["torch_rng_state"])
        self.step = int(state["step"])


def run_curriculum(
    config: RunConfig,
    mono_x: Optional[DomainDataset] = None,
    mono_y: Optional[DomainDataset] = None,
    stereo_x: Optional[DomainDataset] = None,
    stereo_y: Optional[DomainDataset] = None,
    output_dir: Optional[Path] = None,
    resume_from: Optional[Path] = None,
    device: Union[str, torch.device] = "cpu",
) -> Tuple[StereoCycleTrainer, Optional[Path]]:
    """Train a model end to end; returns the trainer and the final checkpoint path."""
    trainer = StereoCycleTrainer(config, device=device, output_dir=output_dir)
    if resume_from is not None:
        state = load_checkpoint(resume_from, expected_mode=config.training.mode)
        trainer.load_state_dict(state["trainer"])
        logger.info(f"Resumed from {resume_from} at step {trainer.step}")
    metrics_path = output_dir / "metrics.jsonl" if output_dir is not None else None
    trainer.fit(mono_x, mono_y, stereo_x, stereo_y, metrics_path=metrics_path)
    final = output_dir / "final.pt" if output_dir is not None else None
    return trainer, final
