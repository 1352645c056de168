"""
Pydantic models for run configuration and run manifests.
"""

from .common import *
from .requests import *
from .responses import *
