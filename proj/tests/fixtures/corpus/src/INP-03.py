import os
import zipfile


def unpack_archive(archive_path, dest_dir):
    with zipfile.ZipFile(archive_path) as zf:
        for member in zf.namelist():
            target = os.path.join(dest_dir, member)
            with open(target, "wb") as out:
                out.write(zf.read(member))
