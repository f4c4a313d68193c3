"""Directed acyclic layer graph with a single sigmoid output."""

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeError, ValidationError
from ..rng import Stream
from .layers import Activation, Layer, sigmoid


@dataclass
class Node:
    name: str
    layer: Layer
    inputs: list
    shape: tuple = field(default=None)


class ModelGraph:
    """Layers in topological order; node ``"input"`` is the network input.

    Parameters
    ----------
    name : str
        Architecture label stored with saved weights.
    input_shape : tuple
        Per-sample input shape, e.g. ``(1, 15, 205)``.
    seed : int
        Seed of the weight initialisation.
    """

    def __init__(self, name, input_shape, seed=0, dtype=np.float64):
        self.name = name
        self.input_shape = tuple(int(s) for s in input_shape)
        self.seed = int(seed)
        self.dtype = np.dtype(dtype)
        self.nodes = []
        self._index = {"input": None}
        self.meta = {}
        self.mode = "eval"

    # ---------------------------------------------------------------- build
    def add(self, name, layer, inputs=None):
        if name in self._index:
            raise ValidationError(f"duplicate node name {name!r}", "name")
        if inputs is None:
            inputs = [self.nodes[-1].name if self.nodes else "input"]
        elif isinstance(inputs, str):
            inputs = [inputs]
        for src in inputs:
            if src not in self._index:
                raise ValidationError(f"node {name!r} reads undefined node {src!r}", "inputs")
        in_shapes = [self.shape_of(s) for s in inputs]
        rng = Stream(self.seed, "init", name)
        shape = tuple(layer.build(in_shapes, rng, self.dtype))
        layer.needs_dx = any(src != "input" for src in inputs)
        node = Node(name, layer, list(inputs), shape)
        self._index[name] = len(self.nodes)
        self.nodes.append(node)
        return name

    def shape_of(self, name):
        if name == "input":
            return self.input_shape
        return self.nodes[self._index[name]].shape

    def node(self, name):
        return self.nodes[self._index[name]]

    def validate(self):
        """Check the DAG contract: all outputs consumed, one scalar sigmoid sink."""
        if not self.nodes:
            raise ValidationError("empty graph", "nodes")
        used = set()
        for n in self.nodes:
            used.update(n.inputs)
        for n in self.nodes[:-1]:
            if n.name not in used:
                raise ValidationError(f"output of node {n.name!r} is never consumed", "nodes")
        if "input" not in used:
            raise ValidationError("graph input is never consumed", "nodes")
        last = self.nodes[-1]
        if not (isinstance(last.layer, Activation) and last.layer.fn == "sigmoid" and last.shape == (1,)):
            raise ValidationError("graph must end in a single sigmoid unit", "nodes")
        return self

    # ---------------------------------------------------------------- modes
    def train(self, dropout=True, batch_stats=True, rng=None):
        """Training mode; ``rng`` drives the dropout masks."""
        self.mode = "train"
        for n in self.nodes:
            n.layer.training = True
            n.layer.batch_stats = batch_stats
            if n.layer.kind == "dropout":
                wide = rng.child("dropout", n.name, lanes=65536) if (dropout and rng is not None) else None
                n.layer.rng = wide
        return self

    def eval(self):
        self.mode = "eval"
        for n in self.nodes:
            n.layer.training = False
            n.layer.rng = None
        return self

    # ---------------------------------------------------------------- params
    def parameters(self):
        """``(node, param_name, array)`` triples in graph order."""
        out = []
        for n in self.nodes:
            for k in sorted(n.layer.params):
                out.append((n.name, k, n.layer.params[k]))
        return out

    def gradients(self):
        return [(n.name, k, n.layer.grads[k]) for n in self.nodes for k in sorted(n.layer.params)]

    def buffers(self):
        out = []
        for n in self.nodes:
            for k in sorted(n.layer.buffers):
                out.append((n.name, k, n.layer.buffers[k]))
        return out

    @property
    def param_count(self):
        return int(sum(n.layer.param_count() for n in self.nodes))

    def apply_constraints(self):
        for n in self.nodes:
            if n.layer.max_norm:
                n.layer.apply_constraints()

    def zero_grads(self):
        for n in self.nodes:
            n.layer.zero_grads()

    def layer_table(self):
        """Rows of ``(name, kind, output_shape, param_count, macs)``."""
        rows = []
        for n in self.nodes:
            in_shapes = [self.shape_of(s) for s in n.inputs]
            rows.append((n.name, n.layer.kind, n.shape, n.layer.param_count(), n.layer.macs(in_shapes)))
        return rows

    def macs(self):
        return int(sum(r[4] for r in self.layer_table()))

    # ---------------------------------------------------------------- compute
    def _prepare(self, x):
        x = np.asarray(x)
        if x.ndim == len(self.input_shape) and (1,) + x.shape[1:] == self.input_shape:
            x = x[:, None]
        if x.shape[1:] != self.input_shape:
            raise ShapeError(f"{self.name} expects (N,) + {self.input_shape}, got {x.shape}")
        return x.astype(self.dtype, copy=False)

    def _run(self, x, stop=None, counted=False):
        vals = {"input": self._prepare(x)}
        macs = 0
        nodes = self.nodes if stop is None else self.nodes[:stop]
        for n in nodes:
            xs = [vals[s] for s in n.inputs]
            if counted:
                y, m = n.layer.forward_counted(xs)
                macs += m
            else:
                y = n.layer.forward(xs)
            vals[n.name] = y
        return vals[nodes[-1].name], macs

    def forward_logits(self, x):
        """Pre-sigmoid output, shape ``(N,)``."""
        return self._run(x, stop=len(self.nodes) - 1)[0].reshape(-1)

    def forward(self, x):
        """Scores in ``[0, 1]``, shape ``(N,)``."""
        return sigmoid(self.forward_logits(x))

    def forward_counted(self, x):
        """Scores via the tap-loop kernels plus the number of MACs issued."""
        out, macs = self._run(x, counted=True)
        return out.reshape(-1), macs

    def predict(self, x, batch_size=256):
        """Eval-mode scores, batched to bound memory."""
        saved = (self.mode, [(n.layer.training, n.layer.rng) for n in self.nodes])
        self.eval()
        x = np.asarray(x)
        out = [self.forward(x[i : i + batch_size]) for i in range(0, len(x), batch_size)]
        self.mode = saved[0]
        for n, (training, rng) in zip(self.nodes, saved[1]):
            n.layer.training, n.layer.rng = training, rng
        return np.concatenate(out) if out else np.zeros(0)

    def loss_and_backward(self, x, y):
        """Mean binary cross-entropy of the batch; gradients land in ``layer.grads``."""
        from .train import bce_with_logits

        y = np.asarray(y, dtype=self.dtype).reshape(-1)
        z = self.forward_logits(x)
        loss, dz = bce_with_logits(z, y)
        self.zero_grads()
        grads = {self.nodes[-2].name: dz.reshape(-1, 1).astype(self.dtype)}
        for n in reversed(self.nodes[:-1]):
            g = grads.pop(n.name, None)
            if g is None:
                g = np.zeros((len(y),) + n.shape, dtype=self.dtype)
            dxs = n.layer.backward(g)
            for src, dx in zip(n.inputs, dxs):
                if src == "input":
                    continue
                grads[src] = dx if src not in grads else grads[src] + dx
        return loss
