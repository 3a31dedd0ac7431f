"""Structured result reports for the command-line front end.

A report collects the computed invariants (each with its residual), the
affiliation verdicts that gate them, the final correspondence status, and the
provenance of every tolerance that influenced the run, then renders as plain
text.
"""


class InvariantReport:
    def __init__(self, model_id, task):
        self.model_id = str(model_id)
        self.task = str(task)
        self.values = []        # (name, value, residual-or-None, note)
        self.affiliations = []  # (label, verdict_string)
        self.tolerances = []    # (name, value, provenance)
        self.status = None      # None | 'PASS' | 'FAIL' | 'SKIPPED(reason)'
        self.lines = []         # extra free-form lines

    def add_value(self, name, value, residual=None, note=""):
        self.values.append((name, value, residual, note))

    def add_affiliation(self, label, verdict):
        self.affiliations.append((label, str(verdict)))

    def add_tolerance(self, name, value, provenance):
        self.tolerances.append((name, value, provenance))

    def add_line(self, text):
        self.lines.append(str(text))

    def set_status(self, status, reason=None):
        self.status = "%s(%s)" % (status, reason) if reason else status

    def render(self):
        out = ["model: %s" % self.model_id, "task: %s" % self.task]
        for name, value, residual, note in self.values:
            if isinstance(value, int):
                body = "%s = %+d" % (name, value)
            else:
                body = "%s = %.6g" % (name, value)
            if residual is not None:
                body += " (resid %.1e)" % residual
            if note:
                body += "  [%s]" % note
            out.append(body)
        for label, verdict in self.affiliations:
            out.append("affiliation[%s]: %s" % (label, verdict))
        out.extend(self.lines)
        if self.status is not None:
            out.append(self.status)
        if self.tolerances:
            out.append("tolerances:")
            for name, value, provenance in self.tolerances:
                out.append("  %s = %g  (%s)" % (name, value, provenance))
        return "\n".join(out)
