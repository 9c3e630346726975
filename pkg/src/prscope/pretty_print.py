import dataclasses
import functools
import textwrap
from typing import Any

from termcolor import colored

from prscope import core
from prscope.core.gf2 import IndependenceReport


@dataclasses.dataclass
class PrettyPrinter:
    """
    Pretty print reports in a reproducible and human readable format.

    This can be used to compare reports by their string representation.
    Colored output can be enabled by setting ".colors" to True, this will use terminal control characters,
    which makes it less suited for uses other than human viewing.
    """

    indentation: int = 2  # how many spaces to indent block content by
    colors: bool = False  # True for color output (term control chars)

    def indent(self, string: str) -> str:
        """Indent by the amount set on the instance"""
        return textwrap.indent(string, prefix=" " * self.indentation)

    def as_block(self, header: str, body: str) -> str:
        """
        Format as a block with a header line and indented lines of block body text.

        Example:

        >>> print(PrettyPrinter().as_block("header", "foo\\nbar"))
        header:
          foo
          bar
        """
        return f"{header}:\n{self.indent(body)}"

    def verdict(self, passed: bool) -> str:  # noqa: FBT001
        """
        >>> PrettyPrinter().verdict(False)
        'FAIL'
        """
        text = "PASS" if passed else "FAIL"
        if self.colors:
            return colored(text, "green" if passed else "red", attrs=["bold"])
        return text

    def header(self, name: str, passed: bool) -> str:  # noqa: FBT001
        if self.colors:
            name = colored(name, "cyan", attrs=["bold"])
        return f"{name} [{self.verdict(passed)}]"

    def with_error(self, value: float, stderr: float) -> str:
        """
        >>> PrettyPrinter().with_error(0.26459, 0.0012)
        '0.26459 +- 0.0012'
        """
        return f"{self.format(value)} +- {stderr:.2g}"

    @functools.singledispatchmethod
    def format(self, obj: Any) -> str:
        """
        Dispatch formatting based on report type.

        Default implementation simply calls str()
        """
        # this prevents empty strings being not visibliy displayed
        return repr(obj) if isinstance(obj, str) else str(obj)

    @format.register
    def format_float(self, obj: float) -> str:
        """
        >>> PrettyPrinter().format(1 / 3)
        '0.333333'
        """
        return f"{obj:.6g}"

    @format.register
    def format_list(self, obj: list) -> str:
        return "[" + ", ".join(self.format(item) for item in obj) + "]"

    @format.register
    def format_dict(self, obj: dict) -> str:
        """
        One line per key, nested mappings as indented blocks.

        >>> print(PrettyPrinter().format({"n": 2, "inner": {"k": 1.5}}))
        n: 2
        inner:
          k: 1.5
        """
        lines = []
        for key, value in obj.items():
            if isinstance(value, dict) and value:
                lines.append(self.as_block(str(key), self.format(value)))
            else:
                lines.append(f"{key}: {self.format(value)}")
        return "\n".join(lines)

    @format.register
    def format_bound_report(self, obj: core.BoundReport) -> str:
        lines = [f"measured: {self.with_error(obj.measured, obj.stderr)}"]
        if obj.target is not None:
            lines.append(f"target: {self.format(obj.target)}")
        if obj.bound is not None:
            lines.append(f"bound: {self.format(obj.bound)}")
        if obj.details:
            lines.append(self.as_block("details", self.format(obj.details)))
        return self.as_block(self.header(obj.statistic, obj.passed), "\n".join(lines))

    @format.register
    def format_distinguisher(self, obj: core.DistinguisherResult) -> str:
        lines = [
            f"accept (ensemble): {self.with_error(obj.accept_prob_ensemble, obj.stderr_ensemble)}",
            f"accept (reference): {self.with_error(obj.accept_prob_haar, obj.stderr_haar)}",
            f"advantage: {self.format(obj.advantage)}",
        ]
        if obj.ci_low is not None:
            lines.append(f"advantage ci: [{self.format(obj.ci_low)}, {self.format(obj.ci_high)}]")
            lines.append(f"null: {self.with_error(obj.null_mean, obj.null_std)}")
        if obj.analytic_bound is not None:
            vacuous = " (vacuous)" if obj.bound_vacuous else ""
            lines.append(f"analytic bound: {self.format(obj.analytic_bound)}{vacuous}")
        lines.append(f"trials: {obj.trials}")
        if obj.details:
            lines.append(self.as_block("details", self.format(obj.details)))
        return self.as_block(self.header(obj.statistic, obj.passed), "\n".join(lines))

    @format.register
    def format_scaling(self, obj: core.ScalingReport) -> str:
        rows = [
            f"d={point.d}: distance {self.with_error(point.frobenius_distance, point.frobenius_stderr)}"
            f" (bound {self.format(point.bound)})"
            for point in obj.points
        ]
        rows.extend(
            f"ratio d={a.d}->{b.d}: {self.with_error(ratio, stderr)}"
            for a, b, ratio, stderr in zip(obj.points, obj.points[1:], obj.ratios, obj.ratio_stderrs, strict=True)
        )
        return self.as_block(self.header(f"design scaling n={obj.n} t={obj.t}", obj.passed), "\n".join(rows))

    @format.register
    def format_report(
        self,
        obj: core.MarginalReport
        | core.EntanglementReport
        | core.FramePotentialEstimate
        | core.SchmidtAudit
        | core.LightconeReport
        | IndependenceReport,
    ) -> str:
        """
        Generic block of the JSON fields of a report.

        >>> from prscope.core.circuits import SchmidtAudit
        >>> print(PrettyPrinter().format(SchmidtAudit(depth=1, ranks=[2, 2], max_rank=2, bound=4)))
        SchmidtAudit [PASS]:
          depth: 1
          ranks: [2, 2]
          max_rank: 2
          bound: 4
        """
        fields = {key: value for key, value in obj.as_json_dict().items() if key != "pass"}
        return self.as_block(self.header(type(obj).__name__, obj.passed), self.format(fields))
