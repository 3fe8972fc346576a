###
# Copyright 2024 the fastdiff developers.
# This file is part of fastdiff.
#
# fastdiff is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# fastdiff is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with fastdiff.  If not, see <http://www.gnu.org/licenses/>.
###

import logging
import getpass
import os
import tempfile


try:
    _user = getpass.getuser()
except Exception:  # no login name in some containers
    _user = 'unknown'

LOGFILE = os.path.join(tempfile.gettempdir(), 'fastdiff_%s.log' % _user)

logging.basicConfig(format="%(asctime)s %(levelname)s:%(name)s:%(message)s",
                    datefmt='%m/%d/%Y %I:%M:%S',
                    filename=LOGFILE,
                    level=logging.DEBUG)
