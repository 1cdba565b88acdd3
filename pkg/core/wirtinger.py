"""
Knot diagrams, Wirtinger presentations and Fox calculus.

PD codes follow the usual convention: X[i, j, k, l] lists the four edge
labels at a crossing counterclockwise, starting with the incoming under
edge i, so the under strand runs i -> k. Edges are labelled 1..2n along the
orientation. The over strand runs l -> j when j = l + 1 (mod 2n); such
crossings are counted as positive.
"""
import json
import logging
import re
from dataclasses import dataclass

from core.exceptions import MalformedPDCodeError, PreconditionError
from core.laurent import INT, LaurentPoly

logger = logging.getLogger(__name__)

_CROSSING = re.compile(r'X\s*\[\s*([^\]]*)\]')


@dataclass(frozen=True)
class FreeWord:
    """A word in the free group: (generator, +1 or -1) letters."""
    letters: tuple = ()

    def __post_init__(self):
        letters = tuple((int(g), int(e)) for g, e in self.letters)
        if any(e not in (1, -1) or g < 0 for g, e in letters):
            raise PreconditionError(f'letters must be (generator >= 0, +-1): {letters}')
        object.__setattr__(self, 'letters', letters)

    @classmethod
    def generator(cls, g, exponent=1):
        sign = 1 if exponent > 0 else -1
        return cls(((g, sign),) * abs(exponent))

    def reduce(self):
        stack = []
        for g, e in self.letters:
            if stack and stack[-1] == (g, -e):
                stack.pop()
            else:
                stack.append((g, e))
        return FreeWord(tuple(stack))

    def inverse(self):
        return FreeWord(tuple((g, -e) for g, e in reversed(self.letters)))

    def concatenate(self, other):
        return FreeWord(self.letters + other.letters).reduce()

    __mul__ = concatenate

    def degree(self, phi):
        """phi extended to the word."""
        return sum(e * phi[g] for g, e in self.letters)

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __str__(self):
        if not self.letters:
            return '1'
        return ' '.join(f'x{g + 1}' if e == 1 else f'x{g + 1}^-1' for g, e in self.letters)


@dataclass(frozen=True)
class PDCode:
    crossings: tuple = ()

    def __post_init__(self):
        try:
            crossings = tuple(tuple(int(x) for x in c) for c in self.crossings)
        except (TypeError, ValueError) as exc:
            raise MalformedPDCodeError(f'crossing labels must be integers: {exc}') from exc
        if any(len(c) != 4 for c in crossings):
            raise MalformedPDCodeError('every crossing needs exactly four labels')
        counts = {}
        for c in crossings:
            for label in c:
                counts[label] = counts.get(label, 0) + 1
        if any(n != 2 for n in counts.values()):
            bad = sorted(label for label, n in counts.items() if n != 2)
            raise MalformedPDCodeError(f'labels {bad} do not occur exactly twice')
        if crossings and sorted(counts) != list(range(1, len(counts) + 1)):
            raise MalformedPDCodeError('edge labels must be 1..2n')
        object.__setattr__(self, 'crossings', crossings)

    @property
    def edge_count(self):
        return 2 * len(self.crossings)

    def __len__(self):
        return len(self.crossings)

    def __str__(self):
        return 'PD[' + ', '.join('X[' + ','.join(map(str, c)) + ']' for c in self.crossings) + ']'


def parse_pd(source):
    """A PDCode from 'PD[X[..], ..]', bare 'X[..]' lists, JSON arrays or Python lists."""
    if isinstance(source, PDCode):
        return source
    if isinstance(source, (list, tuple)):
        return PDCode(tuple(source))
    text = str(source).strip()
    if text.startswith('['):
        try:
            return PDCode(tuple(json.loads(text)))
        except json.JSONDecodeError as exc:
            raise MalformedPDCodeError(f'invalid JSON PD code: {exc}') from exc
    crossings = []
    for body in _CROSSING.findall(text):
        try:
            crossings.append(tuple(int(x) for x in body.split(',')))
        except ValueError as exc:
            raise MalformedPDCodeError(f'bad crossing X[{body}]') from exc
    leftover = _CROSSING.sub('', text).replace('PD', '').strip(' []\n\t,')
    if leftover:
        raise MalformedPDCodeError(f'unexpected text in PD code: {leftover!r}')
    return PDCode(tuple(crossings))


def crossing_signs(pd):
    """+1 when the over strand runs l -> j with j = l + 1 (mod 2n), else -1."""
    pd = parse_pd(pd)
    edges = pd.edge_count
    signs = []
    for i, j, k, l in pd.crossings:
        if (j - l) % edges == 1:
            signs.append(1)
        elif (l - j) % edges == 1:
            signs.append(-1)
        else:
            raise MalformedPDCodeError(f'over strand X[{i},{j},{k},{l}] is not consecutive')
    return signs


def writhe(pd):
    return sum(crossing_signs(pd))


def _arcs(pd):
    """Map each edge label to its Wirtinger arc index, arcs ordered by least label."""
    parent = {label: label for c in pd.crossings for label in c}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for _, j, _, l in pd.crossings:
        a, b = find(j), find(l)
        if a != b:
            parent[max(a, b)] = min(a, b)
    roots = sorted({find(label) for label in parent})
    index = {root: n for n, root in enumerate(roots)}
    return {label: index[find(label)] for label in parent}, len(roots)


@dataclass(frozen=True)
class Presentation:
    generators: int
    relators: tuple
    phi: tuple

    def __post_init__(self):
        if len(self.phi) != self.generators:
            raise PreconditionError('phi needs one degree per generator')
        for r in self.relators:
            if any(g >= self.generators for g, _ in r):
                raise PreconditionError(f'relator {r} uses an unknown generator')
            if r.degree(self.phi) != 0:
                raise PreconditionError(f'relator {r} has nonzero phi-degree')

    @property
    def deficiency(self):
        return self.generators - len(self.relators)


def wirtinger_from_pd(pd):
    """
    One generator per arc and the relator x_k^-1 x_o^e x_i x_o^-e per crossing,
    for under edges i -> k, over arc o and crossing sign e. The relator of
    the last crossing is dropped.
    """
    pd = parse_pd(pd)
    if not pd.crossings:
        return Presentation(1, (), (1,))
    arcs, count = _arcs(pd)
    if count != len(pd.crossings):
        raise MalformedPDCodeError(f'{count} arcs for {len(pd.crossings)} crossings; '
                                   'the code does not describe a knot')
    relators = []
    for (i, j, k, _), sign in zip(pd.crossings, crossing_signs(pd)):
        over = arcs[j]
        word = FreeWord(((arcs[k], -1), (over, sign), (arcs[i], 1), (over, -sign)))
        relators.append(word.reduce())
    logger.debug('Wirtinger presentation: %d generators from %d crossings', count, len(pd))
    return Presentation(count, tuple(relators[:-1]), (1,) * count)


def fox_derivative(word, j):
    """d(word)/d(x_j) as {reduced word: integer coefficient}."""
    result = {}
    prefix = FreeWord()
    for g, e in word:
        if g == j:
            term = prefix if e == 1 else prefix.concatenate(FreeWord(((g, -1),)))
            result[term] = result.get(term, 0) + e
        prefix = prefix.concatenate(FreeWord(((g, e),)))
    return {w: c for w, c in result.items() if c}


def fox_identity_holds(word, generators):
    """sum_j (dw/dx_j)(x_j - 1) = w - 1 in the group ring of the free group."""
    total = {}
    for j in range(generators):
        x = FreeWord(((j, 1),))
        for u, c in fox_derivative(word, j).items():
            for term, sign in ((u.concatenate(x), c), (u, -c)):
                total[term] = total.get(term, 0) + sign
    expected = {word.reduce(): 1}
    expected[FreeWord()] = expected.get(FreeWord(), 0) - 1
    clean = lambda d: {w: c for w, c in d.items() if c}
    return clean(total) == clean(expected)


def abelianize(combination, phi):
    """A group-ring element {word: c} mapped to Z[t^+-1] by x_i -> t^phi(x_i)."""
    terms = {}
    for w, c in combination.items():
        e = w.degree(phi)
        terms[e] = terms.get(e, 0) + c
    return LaurentPoly.from_dict(terms, INT)


def alexander_matrix(pres):
    """The Jacobian (abelianized d r_i / d x_j), one row per relator."""
    return [[abelianize(fox_derivative(r, j), pres.phi) for j in range(pres.generators)]
            for r in pres.relators]


def alexander_module_presentation(pres, j=0):
    """The Alexander matrix with column j deleted; it presents the Alexander module."""
    if not 0 <= j < pres.generators:
        raise PreconditionError(f'column {j} out of range')
    return [[entry for c, entry in enumerate(row) if c != j] for row in alexander_matrix(pres)]


def pd_connected_sum(first, second):
    """
    PD code of the connected sum: the last edge of each diagram is cut and
    the loose ends are joined crosswise, keeping labels consecutive.
    """
    first, second = parse_pd(first), parse_pd(second)
    if not first.crossings:
        return second
    if not second.crossings:
        return first
    n1, n2 = first.edge_count, second.edge_count
    shifted = [tuple(x + n1 for x in c) for c in second.crossings]
    crossings = [list(c) for c in first.crossings] + [list(c) for c in shifted]
    first_end = _incoming_slot(first.crossings, n1, n1)
    second_end = _incoming_slot(second.crossings, n2, n2)
    crossings[first_end[0]][first_end[1]] = n1 + n2
    c, slot = second_end
    crossings[len(first.crossings) + c][slot] = n1
    return PDCode(tuple(tuple(c) for c in crossings))


def _incoming_slot(crossings, edges, label):
    """(crossing index, slot) where edge `label` ends."""
    for n, (i, j, k, l) in enumerate(crossings):
        if i == label:
            return n, 0
        if j == label and (l - j) % edges == 1:
            return n, 1
        if l == label and (j - l) % edges == 1:
            return n, 3
    raise MalformedPDCodeError(f'edge {label} has no incoming end')
