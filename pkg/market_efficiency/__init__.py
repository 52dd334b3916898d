# Copyright (c) The market-efficiency authors.
# All rights reserved.
#
# This source code is licensed under the terms described in the LICENSE file in
# the root directory of this source tree.

__version__ = "0.1.0"
