"""slice-orch - Safe online resource orchestration for end-to-end network slices"""

__version__ = "0.1.0"
