# present to make "app.api" a package.
# Do not import sub-routers here to avoid circulars.
