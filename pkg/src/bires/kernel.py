"""Select the polynomial kernel: compiled extension if built, else pure Python.

Set BIRES_PURE=1 to force the pure-Python kernel (used by the benchmark to
compare both implementations).
"""

import os

if os.environ.get("BIRES_PURE"):
    from bires._kernel_py import (  # noqa: F401
        KERNEL_NAME, padd, psub, pneg, pscale, pmul, pmul_term,
        pdiv_exact, peval, monomial_divides,
    )
else:
    try:
        from bires._kernel_c import (  # noqa: F401
            KERNEL_NAME, padd, psub, pneg, pscale, pmul, pmul_term,
            pdiv_exact, peval, monomial_divides,
        )
    except ImportError:
        from bires._kernel_py import (  # noqa: F401
            KERNEL_NAME, padd, psub, pneg, pscale, pmul, pmul_term,
            pdiv_exact, peval, monomial_divides,
        )
