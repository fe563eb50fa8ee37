"""Define adapters between the text formats and the algebra objects.

The group corpus and scenarios are read here, modules are built from the
mini-language and reports are written back with ruyaml.
"""

import logging
import re
from functools import lru_cache
from io import StringIO
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Tuple, Union

from pydantic import ValidationError
from ruyaml.main import YAML

from shrinklab.exceptions import ScenarioError, ShrinklabError
from shrinklab.fgroup import (
    FiniteGroup,
    Permutation,
    Subgroup,
    from_permutations,
    isomorphic_subgroup,
)
from shrinklab.gmod import (
    FpGModule,
    augmentation_ideal,
    character_module,
    coefficient_module,
    direct_sum,
    direct_sum_of,
    dual_module,
    induced_trivial,
    regular_module,
    shift_coefficients,
    tensor_module,
    tensor_power,
    trivial_module,
    twist,
)
from shrinklab.model import FilterIndex, Scenario, ShrinklabConfig
from shrinklab.profree import LieLayer, TruncatedFreeGroup

log = logging.getLogger(__name__)

CORPUS_PATH = Path(__file__).with_name("corpus.txt")

_CYCLE_RE = re.compile(r"\(([^()]*)\)")
_TOKEN_RE = re.compile(r"\s*(?:(?P<int>-?\d+)|(?P<name>[A-Za-z_]\w*)|(?P<sym>[(),^]))")

CorpusEntry = Tuple[int, List[Permutation]]


def parse_cycles(text: str, degree: int) -> Permutation:
    """Parse a permutation like "(1,2,3)(4,5)" on the points 1..degree.

    Returns:
        The permutation as a tuple of images of 0..degree-1.
    """
    image = list(range(degree))
    remainder = _CYCLE_RE.sub("", text).strip()
    if remainder:
        raise ScenarioError(f"Can't parse {text!r} as cycles, left over: {remainder!r}")
    seen = set()
    for cycle_text in _CYCLE_RE.findall(text):
        if not cycle_text.strip():
            continue
        try:
            points = [int(point) - 1 for point in cycle_text.split(",")]
        except ValueError as error:
            raise ScenarioError(f"Invalid point in cycle ({cycle_text})") from error
        if any(not 0 <= point < degree for point in points) or seen & set(points):
            raise ScenarioError(f"Cycle ({cycle_text}) is not valid on {degree} points")
        if len(set(points)) != len(points):
            raise ScenarioError(f"Cycle ({cycle_text}) repeats a point")
        seen.update(points)
        for position, point in enumerate(points):
            image[point] = points[(position + 1) % len(points)]
    return tuple(image)


def load_corpus(path: Path = CORPUS_PATH) -> Dict[str, CorpusEntry]:
    """Read a corpus file: one group per line as name, degree and generators."""
    corpus: Dict[str, CorpusEntry] = {}
    lines = path.read_text(encoding="utf-8").splitlines()
    for number, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) < 2:
            raise ScenarioError(f"{path}:{number}: expected a name and a degree")
        name, degree = fields[0], int(fields[1])
        corpus[name] = (degree, [parse_cycles(text, degree) for text in fields[2:]])
    log.debug("Loaded %s groups from %s", len(corpus), path)
    return corpus


@lru_cache(maxsize=None)
def builtin_corpus() -> Dict[str, CorpusEntry]:
    """Return the packaged corpus."""
    return load_corpus(CORPUS_PATH)


def corpus_group(
    name: str,
    corpus: Optional[Dict[str, CorpusEntry]] = None,
    config: Optional[ShrinklabConfig] = None,
) -> FiniteGroup:
    """Build a corpus group by name."""
    corpus = corpus if corpus is not None else builtin_corpus()
    if name not in corpus:
        raise ScenarioError(f"Unknown group {name!r}, known: {', '.join(corpus)}")
    degree, perms = corpus[name]
    return from_permutations(degree, perms, name=name, config=config)


def resolve_group(
    scenario: Scenario, config: Optional[ShrinklabConfig] = None
) -> FiniteGroup:
    """Return the group a scenario names or spells out by permutations."""
    if scenario.group is not None:
        return corpus_group(scenario.group, config=config)
    if scenario.permutations is None:
        raise ScenarioError("The scenario does not define a group")
    spec = scenario.permutations
    perms = [parse_cycles(text, spec.degree) for text in spec.generators]
    return from_permutations(spec.degree, perms, name="G", config=config)


class ModuleParser:
    """Build modules from expressions like "tensor(layer(1,(2,2)), dual(aug))".

    Atoms are trivial, trivial(d), regular, aug, char(v₁,…), coeff(k),
    layer(n,(i,j)) and ind(H), where H is a corpus group name or element
    indices generating the subgroup. dual(X), tensor(X,…), sum(X,…),
    power(X,s), twist(X,v₁,…) and shift(X,k) combine them, and X^n is the sum
    of n copies of X.
    """

    def __init__(
        self, group: FiniteGroup, p: int, config: Optional[ShrinklabConfig] = None
    ) -> None:
        """Remember the group, the prime and the caps."""
        self.group = group
        self.p = p
        self.config = config
        self._tokens: List[Tuple[str, str]] = []
        self._position = 0

    def parse(self, text: str) -> FpGModule:
        """Return the module the expression describes."""
        self._tokens = self._tokenize(text)
        self._position = 0
        try:
            module = self._expression()
        except ShrinklabError as error:
            if isinstance(error, ScenarioError):
                raise
            raise ScenarioError(f"Can't build module {text!r}: {error}") from error
        if self._position != len(self._tokens):
            raise ScenarioError(f"Unexpected trailing input in module {text!r}")
        return FpGModule(module.p, module.group, module.rho, text.strip())

    @staticmethod
    def _tokenize(text: str) -> List[Tuple[str, str]]:
        tokens = []
        position = 0
        stripped = text.rstrip()
        while position < len(stripped):
            match = _TOKEN_RE.match(stripped, position)
            if match is None or match.end() == position:
                raise ScenarioError(
                    f"Can't read module expression at {stripped[position:]!r}"
                )
            kind = match.lastgroup or "sym"
            tokens.append((kind, match.group(kind)))
            position = match.end()
        return tokens

    def _peek(self) -> Optional[Tuple[str, str]]:
        if self._position < len(self._tokens):
            return self._tokens[self._position]
        return None

    def _take(self, kind: str, value: Optional[str] = None) -> str:
        token = self._peek()
        if token is None or token[0] != kind or (
            value is not None and token[1] != value
        ):
            raise ScenarioError(
                f"Expected {value or kind} in module expression, got {token}"
            )
        self._position += 1
        return token[1]

    def _arguments(self) -> List[Any]:
        token = self._peek()
        if token != ("sym", "("):
            return []
        self._take("sym", "(")
        arguments = [self._argument()]
        while self._peek() == ("sym", ","):
            self._take("sym", ",")
            arguments.append(self._argument())
        self._take("sym", ")")
        return arguments

    def _argument(self) -> Union[int, FilterIndex, FpGModule]:
        token = self._peek()
        if token is not None and token[0] == "int":
            return int(self._take("int"))
        if token == ("sym", "("):
            self._take("sym", "(")
            first = int(self._take("int"))
            self._take("sym", ",")
            second = int(self._take("int"))
            self._take("sym", ")")
            return FilterIndex(first, second)
        return self._expression()

    def _expression(self) -> FpGModule:
        name = self._take("name")
        if name == "ind":
            module = induced_trivial(self._subgroup(), self.p, self.config)
        else:
            module = self._constructor(name, self._arguments())
        while self._peek() == ("sym", "^"):
            self._take("sym", "^")
            copies = int(self._take("int"))
            if copies < 0:
                raise ScenarioError(f"Can't take {copies} copies of a module")
            module = direct_sum(module, copies)
        return module

    def _subgroup(self) -> Subgroup:
        """Read the argument of ind: a corpus group name or element indices."""
        self._take("sym", "(")
        token = self._peek()
        if token is not None and token[0] == "name":
            model = corpus_group(self._take("name"), config=self.config)
            self._take("sym", ")")
            return isomorphic_subgroup(self.group, model, self.config)
        elements = [int(self._take("int"))]
        while self._peek() == ("sym", ","):
            self._take("sym", ",")
            elements.append(int(self._take("int")))
        self._take("sym", ")")
        if any(not 0 <= element < self.group.order for element in elements):
            raise ScenarioError(
                f"Element indices {elements} are outside 0..{self.group.order - 1}"
            )
        return self.group.closure(elements, self.config)

    def _constructor(self, name: str, arguments: List[Any]) -> FpGModule:
        modules = [
            argument for argument in arguments if isinstance(argument, FpGModule)
        ]
        numbers = [argument for argument in arguments if isinstance(argument, int)]
        indices = [
            argument for argument in arguments if isinstance(argument, FilterIndex)
        ]
        group, p, config = self.group, self.p, self.config
        if name == "trivial":
            return trivial_module(group, p, numbers[0] if numbers else 1)
        if name == "regular":
            return regular_module(group, p, config)
        if name == "aug":
            return augmentation_ideal(group, p, config)
        if name == "char":
            return character_module(group, p, numbers)
        if name == "coeff" and len(numbers) == 1:
            return coefficient_module(group, p, numbers[0], config)
        if name == "layer" and len(numbers) == 1 and len(indices) == 1:
            return LieLayer(p, numbers[0], group, indices[0], config).module
        if name == "dual" and len(modules) == 1:
            return dual_module(modules[0])
        if name == "tensor" and modules:
            result = modules[0]
            for module in modules[1:]:
                result = tensor_module(result, module, config)
            return result
        if name == "sum" and modules:
            return direct_sum_of(modules)
        if name == "power" and len(modules) == 1 and len(numbers) == 1:
            return tensor_power(modules[0], numbers[0], config)
        if name == "twist" and len(modules) == 1:
            return twist(modules[0], numbers)
        if name == "shift" and len(modules) == 1 and len(numbers) == 1:
            return shift_coefficients(modules[0], numbers[0], config)
        raise ScenarioError(
            f"Unknown module constructor {name}({len(arguments)} arguments)"
        )


def parse_module(
    text: str, group: FiniteGroup, p: int, config: Optional[ShrinklabConfig] = None
) -> FpGModule:
    """Build a module from the mini-language."""
    return ModuleParser(group, p, config).parse(text)


def _yaml() -> YAML:
    yaml = YAML()
    yaml.default_flow_style = None
    yaml.width = 4096  # type: ignore
    return yaml


def load_scenario(source: Union[Path, str, TextIO]) -> Scenario:
    """Read a YAML (or JSON) scenario and validate it.

    Raises:
        ScenarioError: if the document is not a valid scenario.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    data = YAML(typ="safe", pure=True).load(text)
    if not isinstance(data, dict):
        raise ScenarioError("A scenario must be a mapping")
    try:
        return Scenario(**data)
    except ValidationError as error:
        raise ScenarioError(str(error)) from error


def dump_report(record: Dict[str, Any], stream: Optional[TextIO] = None) -> str:
    """Render a report mapping as YAML, keeping the key order.

    Returns:
        The rendered text, also written to the stream when one is given.
    """
    buffer = StringIO()
    _yaml().dump(record, buffer)
    text = buffer.getvalue()
    if stream is not None:
        stream.write(text)
    return text


def truncation_record(truncation: TruncatedFreeGroup) -> Dict[str, Any]:
    """Return the dump of a truncation: moduli, Hall basis, G-action and layers."""
    hall = truncation.hall
    return {
        "p": truncation.p,
        "d": truncation.d,
        "group": truncation.group.name,
        "nu_plus_1": str(truncation.nu_plus_1),
        "order": truncation.order,
        "moduli": {
            weight: modulus for weight, modulus in truncation.weight_moduli().items()
        },
        "hall": [
            {
                "index": element.index,
                "weight": element.weight,
                "bracket": hall.bracket_text(element.index),
                "word": list(element.word),
            }
            for element in hall
        ],
        "action": {
            element: truncation.permutations[element].tolist()
            for element in range(truncation.group.order)
        },
        "layers": {
            str(index): truncation.layer_module(index).dim
            for index in truncation.layer_indices()
        },
    }
