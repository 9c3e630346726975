"""
Subcommands of the ``prscope`` command line.

Every subcommand is a :class:`Command` subclass; defining the subclass
registers it under its ``name``.
"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np

from prscope.core import experiments, gf2, moments
from prscope.core.circuits import LayeredCircuit, lightcone_report, random_brickwork, schmidt_rank_audit
from prscope.core.ensembles import PhasedSubspaceStates, StateEnsemble, UnitaryEnsemble
from prscope.core.errors import DomainError
from prscope.parsing import load_circuit
from prscope.parsing._yaml_data_models import Geometry

if TYPE_CHECKING:
    from prscope.core.statevec import StateVector
    from prscope.parsing import ConfigRun

logger = logging.getLogger(__name__)


class Command:
    """
    One subcommand: the flags it reads, their defaults and the check it runs.

    ``checks`` is shown by ``--help`` and states the closed form or law the
    report is compared against; ``reference`` names the known result behind it.
    """

    name: ClassVar[str]
    summary: ClassVar[str]
    checks: ClassVar[str]
    reference: ClassVar[str]
    flags: ClassVar[tuple[str, ...]] = ()
    defaults: ClassVar[dict[str, Any]] = {}
    registry: ClassVar[dict[str, type[Command]]] = {}

    def __init_subclass__(cls, **kwargs):
        super().__init_subclass__(**kwargs)
        if cls.name in Command.registry:
            msg = f"subcommand {cls.name} already registered"
            raise ValueError(msg)
        Command.registry[cls.name] = cls

    def __init__(self, config: ConfigRun):
        self.config = config

    @property
    def sampling(self) -> dict[str, Any]:
        return {"shards": self.config.shards, "threads": self.config.threads}

    def require(self, key: str) -> Any:
        if (value := getattr(self.config, key)) is None:
            msg = f"{self.name} needs --{key.replace('_', '-')}"
            raise DomainError(msg)
        return value

    def state_ensemble(self, key: str = "ensemble") -> StateEnsemble:
        return StateEnsemble.from_config(self.require(key))

    def unitary_ensemble(self) -> UnitaryEnsemble:
        return UnitaryEnsemble.from_config(self.require("unitary"))

    def line_circuit(self, num_qubits: int, rng: np.random.Generator) -> LayeredCircuit:
        """The configured circuit file, or a random brickwork of ``--depth`` layers on a line."""
        if self.config.circuit is not None:
            return LayeredCircuit.from_config(load_circuit(self.config.circuit))
        return random_brickwork(num_qubits, self.require("depth"), Geometry.LINE, rng)

    def run(self, rng: np.random.Generator) -> Any:
        raise NotImplementedError

    def dump_state(self, rng: np.random.Generator) -> StateVector | None:
        """One member of the configured state ensemble."""
        if self.config.ensemble is None:
            return None
        return self.state_ensemble().sample(rng)


class PurityCheck(Command):
    name = "purity-check"
    summary = "mean purity of a k-qubit marginal"
    checks = "E Tr(rho_A^2) = (2^k + 2^(n-k)) / (2^n + 1) for Haar states and exact 2-designs"
    reference = "Page's average purity, via the swap trick on the second moment of a Haar state"
    flags = ("n", "k", "ensemble", "samples")
    defaults: ClassVar[dict[str, Any]] = {"k": 1, "ensemble": "haar", "samples": 20000}

    def run(self, rng: np.random.Generator) -> moments.BoundReport:
        n, k = self.require("n"), self.require("k")
        samples = self.require("samples")
        return moments.purity_expectation_check(n, k, self.state_ensemble(), samples, rng, **self.sampling)


class OffdiagCheck(Command):
    name = "offdiag-check"
    summary = "cross terms of a random unitary after a partial trace"
    checks = "E ||Tr_B(U|v><w|U^dagger)||_2^2 = (2^k - 1) / (2^n - 1) < 2^(k-n) for orthonormal v, w"
    reference = "second-moment Weingarten calculus for Haar unitaries"
    flags = ("n", "k", "unitary", "samples")
    defaults: ClassVar[dict[str, Any]] = {"k": 1, "unitary": "haar", "samples": 20000}

    def run(self, rng: np.random.Generator) -> moments.BoundReport:
        n, k = self.require("n"), self.require("k")
        return moments.offdiag_check(n, k, self.unitary_ensemble(), self.require("samples"), rng, **self.sampling)


class MomentDistance(Command):
    name = "moment-distance"
    summary = "trace distance of the t-th moment to the Haar moment"
    checks = "||E|psi><psi|^(x)t - Pi_sym / C(2^n + t - 1, t)||_1 = 0 for exact t-designs"
    reference = "Schur-Weyl duality: the Haar t-th moment is the normalized symmetric projector"
    flags = ("n", "t", "ensemble", "samples")
    defaults: ClassVar[dict[str, Any]] = {"t": 2, "ensemble": "stabilizer", "samples": 1000}

    def run(self, rng: np.random.Generator) -> moments.BoundReport:
        return moments.moment_distance_check(
            self.state_ensemble(), self.require("t"), self.require("samples"), rng, **self.sampling
        )


class FramePotential(Command):
    name = "frame-potential"
    summary = "frame potential and the Frobenius moment distance it implies"
    checks = "F_t = E |<psi|psi'>|^(2t) >= 1 / C(2^n + t - 1, t) with equality for t-designs"
    reference = "Welch bound; ||M - M_Haar||_2^2 = F_t - 1 / C(2^n + t - 1, t)"
    flags = ("n", "d", "t", "ensemble", "pairs")
    defaults: ClassVar[dict[str, Any]] = {"t": 2, "ensemble": "haar", "pairs": 10000}

    def run(self, rng: np.random.Generator) -> moments.FramePotentialEstimate:
        return moments.frame_potential(
            self.state_ensemble(), self.require("t"), self.require("pairs"), rng, **self.sampling
        )


class SubspaceDesign(Command):
    name = "subspace-design"
    summary = "design quality of phased subspace states as d grows"
    checks = (
        "||M_subspace - M_Haar||_2 <= 2t^2 2^-d + 2^(t-d) + 2^(t-n) + 2t^2 2^-n, "
        "shrinking 1.5x to 3x per unit of d"
    )
    reference = "t-design bound for uniformly random subspace states with k-wise independent phases"
    flags = ("n", "d_values", "t", "pairs")
    defaults: ClassVar[dict[str, Any]] = {"t": 2, "pairs": 100000}

    def run(self, rng: np.random.Generator) -> experiments.ScalingReport:
        return experiments.design_scaling(
            self.require("n"), self.require("d_values"), self.require("t"), self.require("pairs"), rng, **self.sampling
        )


class Lindep(Command):
    name = "lindep"
    summary = "linear dependence attack on phased subspace states"
    checks = (
        "d+1 measured copies of a d-dimensional subspace state are always F2-dependent; "
        "for Haar states this happens with probability at most 2^-(n-d-1) + d(d+1)/2^n"
    )
    reference = "rank of uniform vectors over F2: a set in a d-dimensional space has at most d independent members"
    flags = ("n", "d", "ensemble", "trials", "copies")
    defaults: ClassVar[dict[str, Any]] = {"ensemble": "subspace-kwise", "trials": 5000}

    def run(self, rng: np.random.Generator) -> experiments.DistinguisherResult:
        n, d = self.require("n"), self.require("d")
        return experiments.lindep_distinguisher(
            n, d, self.state_ensemble(), self.require("trials"), rng, copies=self.config.copies, **self.sampling
        )


class Advantage(Command):
    name = "advantage"
    summary = "total variation between circuit outputs under two ensembles"
    checks = (
        "||E C(psi^(x)t) - E C(phi^(x)t)||_TV against the spread of two samples of one pooled distribution; "
        "shallow circuits cannot tell exact 2-designs from Haar states"
    )
    reference = "two-sample total variation with a pooled resampling null"
    flags = ("n", "d", "t", "ensemble", "ensemble_b", "circuit", "outputs", "trials", "postprocess", "expect")
    defaults: ClassVar[dict[str, Any]] = {"t": 1, "ensemble": "haar", "ensemble_b": "haar", "trials": 2000}

    def run(self, rng: np.random.Generator) -> experiments.DistinguisherResult:
        n = self.require("n")
        c = LayeredCircuit.from_config(load_circuit(self.config.circuit)) if self.config.circuit else LayeredCircuit(n)
        outputs = self.config.outputs if self.config.outputs is not None else range(c.num_wires)
        return experiments.circuit_advantage(
            c,
            list(outputs),
            self.state_ensemble("ensemble"),
            self.state_ensemble("ensemble_b"),
            self.require("t"),
            self.require("trials"),
            rng,
            postprocess=self.config.postprocess,
            expect=self.config.expect,
            **self.sampling,
        )


class KwiseMarginals(Command):
    name = "kwise-marginals"
    summary = "k-bit output marginals of a shallow circuit"
    checks = (
        "every k-bit output marginal is close to uniform on wires outside the ancilla lightcone "
        "times the law of the corrupted wires under maximally mixed inputs"
    )
    reference = "lightcone argument: outputs outside the ancilla forward cone see only second moments"
    flags = ("n", "d", "t", "k", "depth", "ensemble", "circuit", "outputs", "subsets", "trials")
    defaults: ClassVar[dict[str, Any]] = {
        "t": 1,
        "k": 3,
        "depth": 2,
        "ensemble": "stabilizer",
        "subsets": 20,
        "trials": 2000,
    }

    def run(self, rng: np.random.Generator) -> experiments.MarginalReport:
        stream_circuit, stream_check = rng.spawn(2)
        ensemble = self.state_ensemble()
        c = self.line_circuit(self.require("t") * ensemble.num_qubits, stream_circuit)
        return experiments.kwise_marginal_check(
            c,
            ensemble,
            self.require("t"),
            self.require("k"),
            self.require("subsets"),
            self.require("trials"),
            stream_check,
            outputs=self.config.outputs,
            **self.sampling,
        )


class PruParallel(Command):
    name = "pru-parallel"
    summary = "parallel queries to a random unitary after a line circuit"
    checks = (
        "E ||rho_A - I/2^k||_1 <= (r+1) 2^(k-n/2) with r <= 4^depth the recursive Schmidt rank of the "
        "pre-circuit state; Markov gives probability delta of exceeding it by 1/delta"
    )
    reference = "recursive Schmidt decomposition across blocks and Markov's inequality"
    flags = ("n", "t", "k", "depth", "unitary", "circuit", "subsets", "within_block", "delta", "trials")
    defaults: ClassVar[dict[str, Any]] = {
        "t": 2,
        "k": 2,
        "depth": 2,
        "unitary": "haar",
        "subsets": 20,
        "delta": 0.1,
        "trials": 2000,
    }

    def run(self, rng: np.random.Generator) -> moments.BoundReport:
        stream_circuit, stream_game = rng.spawn(2)
        n, t = self.require("n"), self.require("t")
        return experiments.pru_parallel_game(
            n,
            t,
            self.line_circuit(t * n, stream_circuit),
            self.unitary_ensemble(),
            self.require("k"),
            self.require("trials"),
            stream_game,
            subsets=self.require("subsets"),
            within_block=self.config.within_block,
            delta=self.require("delta"),
            **self.sampling,
        )


class Pseudoentanglement(Command):
    name = "pseudoentanglement"
    summary = "entanglement entropy of subspace states next to Haar states"
    checks = (
        "a state on a d-dimensional subspace has entropy at most d across every cut; "
        "Haar states match the average entropy at the middle cut"
    )
    reference = "Schmidt rank of a subspace state is at most 2^d; Page's average entropy for Haar states"
    flags = ("n", "d", "ensemble", "samples")
    defaults: ClassVar[dict[str, Any]] = {"ensemble": "subspace-kwise", "samples": 200}

    def run(self, rng: np.random.Generator) -> experiments.EntanglementReport:
        ensemble = self.state_ensemble()
        if not isinstance(ensemble, PhasedSubspaceStates):
            msg = f"pseudoentanglement compares phased subspace states, got {ensemble.variant}"
            raise DomainError(msg)
        return experiments.pseudoentanglement_report(
            ensemble.n, ensemble.d, self.require("samples"), rng, ensemble=ensemble, **self.sampling
        )


class Lightcone(Command):
    name = "lightcone"
    summary = "backward lightcones of the outputs and the forward lightcone of the ancillae"
    checks = "a depth-D circuit of two-qubit gates has backward cones of at most 2^D wires"
    reference = "causal cone of a layered circuit of two-qubit gates"
    flags = ("n", "depth", "circuit", "outputs")
    defaults: ClassVar[dict[str, Any]] = {"depth": 2}

    def run(self, rng: np.random.Generator) -> Any:
        if self.config.circuit is not None:
            c = LayeredCircuit.from_config(load_circuit(self.config.circuit))
        else:
            c = random_brickwork(self.require("n"), self.require("depth"), Geometry.LINE, rng)
        return lightcone_report(c, self.config.outputs)


class SchmidtAuditCommand(Command):
    name = "schmidt-audit"
    summary = "Schmidt rank of line circuit outputs at every contiguous cut"
    checks = "a depth-D line circuit applied to |0...0> has Schmidt rank at most 4^D across every cut"
    reference = "a two-qubit gate across a cut raises the Schmidt rank by a factor of at most 4"
    flags = ("n", "depth", "circuit", "circuits")
    defaults: ClassVar[dict[str, Any]] = {"depth": 2, "circuits": 1}

    def run(self, rng: np.random.Generator) -> Any:
        if self.config.circuit is not None:
            return schmidt_rank_audit(LayeredCircuit.from_config(load_circuit(self.config.circuit)))
        n, depth = self.require("n"), self.require("depth")
        audits = [
            schmidt_rank_audit(random_brickwork(n, depth, Geometry.LINE, stream))
            for stream in rng.spawn(self.require("circuits"))
        ]
        worst = max(audits, key=lambda audit: audit.max_rank)
        logger.info("audited %d circuits, largest rank %d", len(audits), worst.max_rank)
        return worst


class KwiseVerify(Command):
    name = "kwise-verify"
    summary = "exhaustive check of the polynomial k-wise independent family"
    checks = "over all seeds, the outputs at any k distinct inputs take every k-bit pattern equally often"
    reference = "polynomial hashing over GF(2^m), the Wegman-Carter k-wise independent family"
    flags = ("m", "k", "subsets")
    defaults: ClassVar[dict[str, Any]] = {"m": 4, "k": 4, "subsets": 50}

    def run(self, rng: np.random.Generator) -> gf2.IndependenceReport:
        return gf2.kwise_verify(self.require("m"), self.require("k"), self.require("subsets"), rng)
