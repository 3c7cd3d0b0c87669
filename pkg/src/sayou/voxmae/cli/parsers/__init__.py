# Copyright (c) 2025-2026, Sayouzone
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""
CLI 파서 모듈
"""

from .config import ConfigParser
from .manifest import ManifestParser
from .ply import PlyWriter, z_colors

__all__ = [
    "ConfigParser",
    "ManifestParser",
    "PlyWriter",
    "z_colors",
]
