"""Run records: the unit of output produced by one training run."""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["EvalPoint", "RunRecord"]


@dataclass(frozen=True)
class EvalPoint:
    """One evaluation checkpoint: training progress (episodes completed),
    mean undiscounted eval return, and the population std across eval episodes."""

    progress: int
    mean_return: float
    std_return: float


@dataclass
class RunRecord:
    """Everything one (config, seed) training run produced.

    ``fingerprint`` identifies the run's group configuration (env, agent,
    wrapper, rate, budgets) but not the seed, so sibling seeds share it.
    ``final_return`` always equals the mean of the last curve point.
    """

    fingerprint: str
    seed: int
    curve: list[EvalPoint]
    final_return: float
    train_perturbations: dict[str, int]
    eval_perturbations: dict[str, int]
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "fingerprint": self.fingerprint,
            "seed": self.seed,
            "curve": [
                {
                    "progress": pt.progress,
                    "mean_return": pt.mean_return,
                    "std_return": pt.std_return,
                }
                for pt in self.curve
            ],
            "final_return": self.final_return,
            "train_perturbations": dict(self.train_perturbations),
            "eval_perturbations": dict(self.eval_perturbations),
            "config": self.config,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunRecord":
        curve = [
            EvalPoint(int(pt["progress"]), float(pt["mean_return"]), float(pt["std_return"]))
            for pt in data["curve"]
        ]
        record = cls(
            fingerprint=str(data["fingerprint"]),
            seed=int(data["seed"]),
            curve=curve,
            final_return=float(data["final_return"]),
            train_perturbations=dict(data["train_perturbations"]),
            eval_perturbations=dict(data["eval_perturbations"]),
            config=dict(data.get("config", {})),
        )
        record.validate()
        return record

    def validate(self) -> None:
        if not self.curve:
            raise ValueError("run record has an empty eval curve")
        if self.final_return != self.curve[-1].mean_return:
            raise ValueError("final_return does not match the last curve point")
