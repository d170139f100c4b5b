"""Policy network that proposes architectures, trained with REINFORCE.

The default policy is a single-layer tanh recurrent cell: each decision is
sampled from a softmax head over its menu, and the embedding of the chosen
option feeds the next step, so later decisions condition on earlier ones.
A factorized policy (independent logits per decision, no recurrence) is
available for ablation. Gradients are exact backpropagation through the
sampled path; the update subtracts an exponential-moving-average reward
baseline and adds an entropy bonus.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .metrics import softmax
from .rng import rng_for

CHECKPOINT_VERSION = 1
POLICIES = ("recurrent", "factorized")


class Controller:
    """Sampling policy over an ordered list of categorical decisions."""

    def __init__(
        self,
        arities: list[int] | tuple[int, ...],
        hidden_size: int = 64,
        embed_size: int = 16,
        policy: str = "recurrent",
        init_seed: int = 0,
        baseline: float = 0.0,
    ):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}; expected one of {POLICIES}")
        if not arities or any(a < 1 for a in arities):
            raise ValueError("arities must be a nonempty list of positive ints")
        self.arities = list(int(a) for a in arities)
        self.hidden_size = hidden_size
        self.embed_size = embed_size
        self.policy = policy
        self.baseline = float(baseline)
        self.params: dict[str, np.ndarray] = {}
        self._init_params(init_seed)

    def _init_params(self, init_seed: int) -> None:
        rng = rng_for(init_seed, "controller-init")
        n = len(self.arities)
        if self.policy == "factorized":
            # Zero logits: the initial policy is uniform over every menu.
            for t, arity in enumerate(self.arities):
                self.params[f"logits_{t}"] = np.zeros(arity)
            return
        h, e = self.hidden_size, self.embed_size
        self.params["h0"] = np.zeros(h)
        self.params["start_embed"] = rng.normal(0.0, 0.1, size=e)
        self.params["w_xh"] = rng.normal(0.0, 0.1, size=(e, h))
        self.params["w_hh"] = rng.normal(0.0, 0.1, size=(h, h))
        self.params["b_h"] = np.zeros(h)
        for t, arity in enumerate(self.arities):
            # Zero output heads: the initial policy is uniform over every menu.
            self.params[f"w_out_{t}"] = np.zeros((h, arity))
            self.params[f"b_out_{t}"] = np.zeros(arity)
            if t < n - 1:
                self.params[f"embed_{t}"] = rng.normal(0.0, 0.1, size=(arity, e))

    # -- forward -----------------------------------------------------------

    def _forward(self, choices: list[int] | None, rng=None, greedy: bool = False):
        """Run the policy; if ``choices`` is None, sample them along the way.

        Returns (choices, per-step probs, caches) where caches holds the
        intermediates needed for exact backpropagation.
        """
        n = len(self.arities)
        sampled: list[int] = []
        probs: list[np.ndarray] = []
        if self.policy == "factorized":
            for t in range(n):
                p = softmax(self.params[f"logits_{t}"])
                choice = self._pick(p, choices, t, rng, greedy)
                sampled.append(choice)
                probs.append(p)
            return sampled, probs, None

        xs: list[np.ndarray] = []
        h_prevs: list[np.ndarray] = []
        hs: list[np.ndarray] = []
        h = self.params["h0"]
        x = self.params["start_embed"]
        for t in range(n):
            xs.append(x)
            h_prevs.append(h)
            h = np.tanh(x @ self.params["w_xh"] + h @ self.params["w_hh"] + self.params["b_h"])
            hs.append(h)
            p = softmax(h @ self.params[f"w_out_{t}"] + self.params[f"b_out_{t}"])
            choice = self._pick(p, choices, t, rng, greedy)
            sampled.append(choice)
            probs.append(p)
            if t < n - 1:
                x = self.params[f"embed_{t}"][choice]
        return sampled, probs, (xs, h_prevs, hs)

    def _pick(self, p: np.ndarray, choices, t: int, rng, greedy: bool) -> int:
        if choices is not None:
            choice = int(choices[t])
            if not 0 <= choice < p.shape[0]:
                raise ValueError(f"decision {t}: choice {choice} out of range")
            return choice
        if greedy:
            return int(np.argmax(p))
        if rng is None:
            raise ValueError("sampling requires an rng")
        return int(rng.choice(p.shape[0], p=p))

    def sample(self, rng=None, greedy: bool = False) -> tuple[list[int], np.ndarray]:
        """Sample one decision path; returns (choices, per-decision log-probabilities)."""
        choices, probs, _ = self._forward(None, rng=rng, greedy=greedy)
        log_probs = np.array([math.log(probs[t][c]) for t, c in enumerate(choices)])
        return choices, log_probs

    def log_probs(self, choices: list[int]) -> np.ndarray:
        _, probs, _ = self._forward(choices)
        return np.array([math.log(probs[t][c]) for t, c in enumerate(choices)])

    def step_probs(self, choices: list[int]) -> list[np.ndarray]:
        """Per-decision distributions along the given path."""
        _, probs, _ = self._forward(choices)
        return probs

    def marginal_probability(self, decision: int, option: int, rng, n_samples: int = 200) -> float:
        """Monte-Carlo estimate of the marginal probability of one option."""
        if self.policy == "factorized":
            return float(softmax(self.params[f"logits_{decision}"])[option])
        total = 0.0
        for _ in range(n_samples):
            choices, probs, _ = self._forward(None, rng=rng)
            total += float(probs[decision][option])
        return total / n_samples

    # -- backward ----------------------------------------------------------

    def path_objective(self, choices: list[int], coef_logp: float = 1.0, coef_ent: float = 0.0) -> float:
        """coef_logp * sum(log pi(a_t)) + coef_ent * sum(entropy_t) along the path."""
        _, probs, _ = self._forward(choices)
        logp = sum(math.log(probs[t][c]) for t, c in enumerate(choices))
        ent = sum(float(-(p * np.log(p)).sum()) for p in probs)
        return coef_logp * logp + coef_ent * ent

    def path_gradients(self, choices: list[int], coef_logp: float = 1.0, coef_ent: float = 0.0) -> dict[str, np.ndarray]:
        """Exact gradients of path_objective with respect to every parameter."""
        _, probs, caches = self._forward(choices)
        grads = {name: np.zeros_like(value) for name, value in self.params.items()}

        def dlogits_at(t: int) -> np.ndarray:
            p = probs[t]
            onehot = np.zeros_like(p)
            onehot[choices[t]] = 1.0
            dlogits = coef_logp * (onehot - p)
            if coef_ent != 0.0:
                logp = np.log(p)
                entropy = float(-(p * logp).sum())
                dlogits += coef_ent * (-p * (logp + entropy))
            return dlogits

        n = len(self.arities)
        if self.policy == "factorized":
            for t in range(n):
                grads[f"logits_{t}"] += dlogits_at(t)
            return grads

        xs, h_prevs, hs = caches
        dh_next = np.zeros(self.hidden_size)
        for t in reversed(range(n)):
            dlogits = dlogits_at(t)
            grads[f"w_out_{t}"] += np.outer(hs[t], dlogits)
            grads[f"b_out_{t}"] += dlogits
            dh = self.params[f"w_out_{t}"] @ dlogits + dh_next
            da = dh * (1.0 - hs[t] ** 2)
            grads["w_xh"] += np.outer(xs[t], da)
            grads["w_hh"] += np.outer(h_prevs[t], da)
            grads["b_h"] += da
            dx = self.params["w_xh"] @ da
            if t == 0:
                grads["start_embed"] += dx
            else:
                grads[f"embed_{t - 1}"][choices[t - 1]] += dx
            dh_next = self.params["w_hh"] @ da
        grads["h0"] += dh_next
        return grads

    def reinforce_update(
        self,
        choices: list[int],
        reward: float,
        lr: float = 0.01,
        baseline_decay: float = 0.9,
        entropy_coef: float = 0.01,
    ) -> float:
        """Ascend lr * ((reward - baseline) * grad log-prob + entropy bonus); returns the advantage used."""
        if not math.isfinite(reward):
            raise ValueError(f"reward must be finite, got {reward}")
        advantage = reward - self.baseline
        grads = self.path_gradients(choices, coef_logp=advantage, coef_ent=entropy_coef)
        for name, grad in grads.items():
            self.params[name] += lr * grad
        self.baseline = baseline_decay * self.baseline + (1.0 - baseline_decay) * reward
        return advantage

    # -- persistence -------------------------------------------------------

    def save_checkpoint(self, path: str | Path, rng: np.random.Generator | None = None) -> None:
        """Versioned binary checkpoint of all parameters, baseline, and RNG state."""
        meta = {
            "checkpoint_version": CHECKPOINT_VERSION,
            "policy": self.policy,
            "arities": self.arities,
            "hidden_size": self.hidden_size,
            "embed_size": self.embed_size,
            "baseline": self.baseline,
            "rng_state": rng.bit_generator.state if rng is not None else None,
        }
        arrays = {f"param_{name}": value for name, value in self.params.items()}
        np.savez(Path(path), meta=np.array(json.dumps(meta)), **arrays)

    @classmethod
    def load_checkpoint(cls, path: str | Path) -> tuple["Controller", np.random.Generator | None]:
        with np.load(Path(path), allow_pickle=False) as data:
            meta = json.loads(str(data["meta"]))
            if meta.get("checkpoint_version") != CHECKPOINT_VERSION:
                raise ValueError(f"unsupported checkpoint version {meta.get('checkpoint_version')}")
            ctrl = cls(
                arities=meta["arities"],
                hidden_size=meta["hidden_size"],
                embed_size=meta["embed_size"],
                policy=meta["policy"],
                baseline=meta["baseline"],
            )
            for key in data.files:
                if key.startswith("param_"):
                    ctrl.params[key[len("param_") :]] = data[key]
        rng = None
        if meta["rng_state"] is not None:
            rng = np.random.default_rng()
            state = meta["rng_state"]
            # JSON round-trip of numpy's state dict stringifies nothing here,
            # but uint128 values survive as plain ints.
            rng.bit_generator.state = state
        return ctrl, rng
