from ._codedq import *  # noqa: F401,F403
from ._codedq import __doc__  # noqa: F401
