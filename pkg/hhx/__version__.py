# This file is part of hhx, a laboratory for Helmholtz decompositions and Maxwell
# constants on voxel domains. hhx is licensed under the Affero General Public License
# v3, see <https://www.gnu.org/licenses/>.

VERSION = (0, 3, 1)

__version__ = ".".join(map(str, VERSION))
