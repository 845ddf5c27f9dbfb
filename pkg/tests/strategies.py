"""Shared hypothesis strategies."""

from hypothesis import strategies as st

from shadowtrace.groups import cyclic_group, free_abelian_group, free_group, symmetric_group, trivial_group

MODELS = {
    "free2": free_group(2),
    "free3": free_group(3),
    "zz2": free_abelian_group(2),
    "zz1": free_abelian_group(1),
    "s3": symmetric_group(3),
    "c6": cyclic_group(6),
    "trivial": trivial_group(),
}


def raw_words(rank, max_len=10):
    if rank == 0:
        return st.just([])
    letters = st.integers(1, rank).flatmap(lambda i: st.sampled_from([i, -i]))
    return st.lists(letters, max_size=max_len)


@st.composite
def model_and_elements(draw, k=1, names=None):
    name = draw(st.sampled_from(sorted(names or MODELS)))
    G = MODELS[name]
    elems = [G.normal_form(draw(raw_words(G.rank, 8))) for _ in range(k)]
    return (G, *elems)
