import os

import pydot
import yaml

from sknorm.tracemodel import LabeledTraceSet

# 1) Load config
_CONFIG_FILE = os.path.join(os.path.dirname(__file__), "visualization_config.yaml")
with open(_CONFIG_FILE, "r") as f:
    _CFG = yaml.safe_load(f)


class TraceSetVisualizer:
    def __init__(self, traces: LabeledTraceSet, triple=None, title=None):
        """
        traces = the labelled trace set to draw
        triple = optional StateSetTriple over the same universe; colours the nodes
        """
        if triple is not None and len(triple.universe) != len(traces.universe):
            raise ValueError("triple is not over the universe of the trace set")
        self.traces = traces
        self.triple = triple
        self.title = title
        self.nodes = {}
        # aliases for convenience
        self.os = _CFG["occurrence_shapes"]
        self.ns = _CFG["node_styles"]
        self.es = _CFG["edge_styles"]
        self.cc = _CFG["color_config"]
        self.gl = _CFG["graph_layout"]
        self.gc = _CFG["graph_config"]

        self.occurrence = self._occurrence()

    def _occurrence(self):
        """Universe index -> 'positive', 'negative' or 'both'."""
        seen = {}
        for label, _, trace in self.traces.labelled():
            for s in trace:
                k = self.traces.state_index[s.bits]
                if seen.get(k, label) != label:
                    seen[k] = "both"
                else:
                    seen[k] = label
        return seen

    def _memberships(self, k):
        if self.triple is None:
            return []
        names = ("condition", "target", "deadline")
        return [name for name, members in zip(names, self.triple.components()) if k in members]

    def _make_node(self, k):
        """Create or return the styled pydot.Node of universe state ``k``."""
        if k in self.nodes:
            return self.nodes[k]
        state = self.traces.universe[k]

        style = dict(self.ns["default"])
        style["shape"] = self.os[self.occurrence.get(k, "positive")]
        label = ",".join(state.true_props()) or "-"
        style["label"] = f"s{k} {{{label}}}"

        members = self._memberships(k)
        if len(members) > 1:
            style.update(self.ns["multiple_sets"])
            style["fillcolor"] = ":".join(self.cc[m] for m in members)
        elif members:
            style["fillcolor"] = self.cc[members[0]]
        else:
            style["fillcolor"] = self.cc["default_other_color"]
        if members:
            style["tooltip"] = ", ".join(members)

        node = pydot.Node(f"s{k}", **style)
        self.nodes[k] = node
        return node

    def transitions(self):
        """Distinct ``(label, src, dst)`` steps between consecutive states, in trace order."""
        steps = {}
        for label, _, trace in self.traces.labelled():
            idx = [self.traces.state_index[s.bits] for s in trace]
            for src, dst in zip(idx, idx[1:]):
                steps.setdefault((label, src, dst), None)
        return list(steps)

    def create_graph(self, title=None):
        """
        Return a PyDot graph of the trace set.

        One node per state of the universe, one edge per distinct step,
        solid for positive and dashed for negative traces. Base style
        configuration is in visualization_config.yaml

        Parameters
        -----------
        title : string, optional
            A title for the generated graph.

        Returns
        -----------

        graph: pydot.core.Dot
        """
        gconf = self.gc
        graph = pydot.Dot(graph_type=gconf["graph_type"])
        if title is None:
            title = self.title if self.title is not None else gconf["title"]
        graph.set_label(title)
        graph.set_labelloc("t")
        graph.set("rankdir", self.gl["rankdir"])
        graph.set("nodesep", str(self.gl["node_padding"]))

        for k in range(len(self.traces.universe)):
            graph.add_node(self._make_node(k))

        for label, src, dst in self.transitions():
            style = dict(self.es.get(label, self.es["default"]))
            graph.add_edge(pydot.Edge(self.nodes[src], self.nodes[dst], **style))

        return graph

    def to_dot(self, title=None) -> str:
        return self.create_graph(title).to_string()
